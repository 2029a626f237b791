#ifndef INTERCITY_SYNTH_HPP
#define INTERCITY_SYNTH_HPP

#include <cstdint>

#include "intercity/forecast.hpp"
#include "intercity/nl_engine.hpp"

namespace intercity {

// Categorical marginals for independent per-attribute sampling. Bands carry
// a (lo, hi, share) triple; categories a (label/code, share) pair.
struct Marginals {
  struct Band {
    double lo, hi, share;
  };
  std::vector<Band> age;            // years
  std::vector<Band> income;         // Mil VND / month
  double male_share = 0.5315;
  std::vector<std::pair<std::string, double>> marital;  // single / married / other
  std::vector<double> occupation;   // class 1..6 shares
  std::vector<double> education;    // class 1..5 shares
  double working_share = 0.65;

  // Survey-summary defaults.
  static Marginals survey_defaults();
  void validate() const;
};

PersonTable simulate_population(int n, const Marginals& marginals, std::uint64_t seed);

struct SimulateOptions {
  int sp_situations_per_person = 4;
  double rp_cost_jitter = 0.3;  // multiplicative U(1-j, 1+j)
  double rp_time_jitter = 0.2;
};

std::pair<RPDataset, SPDataset> simulate_choices(const PersonTable& population,
                                                 const Scenario& scenario,
                                                 const std::map<std::string, double>& params_true,
                                                 const ModelSpec& spec, int trips_per_person,
                                                 std::uint64_t seed,
                                                 const SimulateOptions& options = {});

struct LeafProb {
  int dest_index = 0;
  int mode_index = 0;
  double prob = 0.0;
};

// Independent oracle: enumerates every (destination, mode) leaf with plain
// exponential arithmetic, no log-sum-exp shortcuts.
std::vector<LeafProb> bruteforce_prob(const Observation& obs,
                                      const std::map<std::string, double>& params,
                                      const ModelSpec& spec);

struct RecoveryTolerances {
  double se_multiple = 3.0;
  double relative = 0.05;         // applies when |true| > relative_floor
  double relative_floor = 0.1;
};

struct RecoveryReport {
  struct Entry {
    std::string name;
    double truth = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double bias = 0.0;
    double se_units = 0.0;
    bool pass = false;
  };
  std::vector<Entry> entries;
  bool estimation_converged = false;
  bool passed = false;
  std::string failure;
};

RecoveryReport recovery_test(const ModelSpec& spec, const Scenario& scenario,
                             const std::map<std::string, double>& params_true, int n,
                             std::uint64_t seed, const RecoveryTolerances& tol = {});

// Emit datasets in the exact CSV schemas the loaders consume.
void write_persons_csv(const PersonTable& persons, const std::string& path);
void write_regions_csv(const RegionTable& regions, const std::string& path);
void write_rp_csv(const RPDataset& rp, const std::string& path);
void write_sp_csv(const SPDataset& sp, const std::string& path);

}  // namespace intercity

#endif
