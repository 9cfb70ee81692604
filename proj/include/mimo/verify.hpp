#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mimo/mse.hpp"
#include "mimo/problem.hpp"

namespace mimo {

enum class Execution { Serial, Parallel };

struct OracleReport {
    std::string name;
    int instances = 0;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::vector<std::uint64_t> seeds;
    std::string detail;
};

struct McEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
};

// Samples are split into fixed chunks with their own engines and reduced in chunk order,
// so both executions return bitwise-identical results.
McEstimate monte_carlo_mse_dl(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise, int k,
                              int s, std::int64_t n_samples, std::uint64_t seed, Execution exec = Execution::Parallel);
McEstimate monte_carlo_mse_if(const InterferenceTransceiver& ifc, const ChannelSet& ch, int k, int s,
                              std::int64_t n_samples, std::uint64_t seed, Execution exec = Execution::Parallel);

// Desk-scale instance for verification: K=2, N=4, M=S=[2,2], reference caps, SNR in dB.
Instance desk_instance(const ProblemSpec& spec, std::uint64_t seed, double snr_db = 10.0);

OracleReport duality_roundtrip_suite(const ProblemSpec& spec, const std::vector<std::uint64_t>& seeds);
OracleReport duality_inequality_suite(const ProblemSpec& spec, const std::vector<std::uint64_t>& seeds);
OracleReport total_power_suite(const ProblemSpec& spec, const std::vector<std::uint64_t>& seeds);
OracleReport structured_inverse_suite(int count, int min_size, int max_size, std::uint64_t seed);
OracleReport fixed_point_suite(int count, std::uint64_t seed);
OracleReport gp_oracle_suite(int count, std::uint64_t seed);
OracleReport identity_suite(int count, std::uint64_t seed);
OracleReport monte_carlo_suite(int count, std::int64_t samples, std::uint64_t seed);

// Random matrix with nonpositive off-diagonals and unit column sums.
RMat random_structured_matrix(int n, std::uint64_t seed, std::uint64_t index);

}  // namespace mimo
