#ifndef RSL_DATASET_H
#define RSL_DATASET_H

#include "regression.h"
#include "rng.h"
#include "strips.h"
#include "task_io.h"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsl {
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RslConfig {
    int num_rollouts = 5;          // N_r
    int length = 500;              // L
    int num_train = 100000;        // N_t
    double random_percent = 50.0;  // P_r
    SelectionMode mode = SelectionMode::Novelty;
    std::uint64_t seed = 0;
    // Probability that an unassigned atom is true in a sampled state;
    // |I| / |F| of the task when unset.
    std::optional<double> completion_density;

    void validate() const;
};

struct Provenance {
    int rollout = -1;   // -1 for randomly sampled states
    int index = -1;

    bool is_random() const {return rollout < 0;}
};

struct LabeledRecord {
    State state;
    int label = 0;
    bool validation = false;
    Provenance provenance;
};

struct LabeledDataset {
    std::size_t num_atoms = 0;
    std::vector<LabeledRecord> records;

    std::size_t num_validation() const;
    std::size_t num_train() const {return records.size() - num_validation();}
};

struct SamplingCounters {
    std::uint64_t subset_tests = 0;
};

double default_completion_density(const GroundTask &task);

/*
  Keeps every atom of x; resolves each mutex pair of s in ascending (p, q)
  order. If one side of the pair is in x the other is removed, otherwise a
  uniformly chosen side is removed.
*/
State repair_mutexes(State s, const PreImage &x, const MutexTable &mutexes, Rng &rng);

// x plus each other atom independently with probability `density`, then
// mutex repair.
State complete_preimage(const PreImage &x, const MutexTable &mutexes, Rng &rng, double density);

// min{i | x_i^j ⊆ s}, or L + 1 if s is in no visited state set.
int label_state(const State &s, const RegressionSet &regressions,
                SamplingCounters *counters = nullptr);

/*
  round(N_t * P_r / 100) random states followed by pre-image states drawn
  uniformly over the non-root (rollout, index) pairs; all labeled with
  label_state. A seeded shuffle then marks the last 20% as validation.
*/
LabeledDataset sample_states(const RegressionSet &regressions, const TaskBundle &bundle,
                             const RslConfig &config, SamplingCounters *counters = nullptr);

// "label,bits" header, one line per record, bits as AtomSet::to_hex.
std::string dataset_to_csv(const LabeledDataset &dataset);

// {"format_version":1, "task_sha256", "config", "split", "provenance"}
std::string dataset_sidecar(const LabeledDataset &dataset, const std::string &task_sha256,
                            const RslConfig &config);
}

#endif
