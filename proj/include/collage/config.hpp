#pragma once
#include <string>
#include <vector>

#include "collage/trainer.hpp"

namespace collage {

// JSON run configuration, schema_version 1. Unknown keys are rejected;
// missing optional keys take the RunConfig defaults. Parse and validation
// errors throw std::invalid_argument with the offending key or byte position.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

// Serialized CSV: a "# schema_version=1" comment, the fixed header
// step,strategy,loss,edq,intended_norm,effective_norm,imprecision_pct,param_norm
// and one row per record with floats in full round-trip scientific notation.
std::string records_to_csv(const std::vector<std::pair<std::string, MetricsRecord>>& rows);

// Runs the config and writes the CSV; nothing is left behind on failure.
void cmd_train(const RunConfig& config, const std::string& out_path);

struct CompareSummary {
    std::string strategy;
    double final_loss = 0.0;
    double mean_edq = 0.0;
    int memory_bytes = 0;
};

// Runs every strategy on identical data/init streams and writes a long-format
// CSV (rows interleaved by step, then strategy in the given order).
std::vector<CompareSummary> cmd_compare(const RunConfig& config,
                                        const std::vector<std::string>& strategy_names,
                                        const std::string& out_path);

std::string memory_table_text();

}  // namespace collage
