// Command-line front end: verification battery, training runs, strategy
// comparisons, and the per-strategy memory table.
//
// Exit codes: 0 success, 1 verification or run failure, 2 usage/config error.
#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "collage/config.hpp"
#include "collage/verify.hpp"

namespace {

int run_verify(const std::vector<std::string>& formats, uint64_t bf16_pairs, uint64_t seed) {
    using collage::verify::CheckLine;
    std::vector<CheckLine> lines;
    for (const auto& name : formats) {
        const auto checks =
            collage::verify::format_checks(collage::format_by_name(name), bf16_pairs, seed);
        lines.insert(lines.end(), checks.begin(), checks.end());
    }
    for (const auto& c : collage::verify::table1_checks()) lines.push_back(c);
    lines.push_back(collage::verify::memory_table_check());

    bool all_pass = true;
    for (const auto& line : lines) {
        std::printf("[%s] %s: %s\n", line.pass ? "PASS" : "FAIL", line.name.c_str(),
                    line.detail.c_str());
        all_pass = all_pass && line.pass;
    }
    std::printf("%s\n", all_pass ? "verification passed" : "verification FAILED");
    return all_pass ? 0 : 1;
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= s.size()) {
        const size_t comma = s.find(',', pos);
        const std::string item = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"low-precision multi-component optimizer laboratory"};
    app.require_subcommand(1);

    int64_t seed_override = -1;
    int64_t record_every_override = -1;
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--record-every", record_every_override, "override the record interval");

    auto* verify_cmd = app.add_subcommand("verify", "run the verification battery");
    std::vector<std::string> formats;
    uint64_t bf16_pairs = 10000000;
    uint64_t verify_seed = 20240815;
    verify_cmd->add_option("--format", formats, "formats to verify (repeatable)");
    verify_cmd->add_option("--bf16-pairs", bf16_pairs,
                           "sampled pair count for formats wider than 8 bits");
    verify_cmd->add_option("--census-seed", verify_seed, "seed for sampled censuses");

    auto* train_cmd = app.add_subcommand("train", "run one strategy and write a CSV");
    std::string train_config, train_out;
    train_cmd->add_option("--config", train_config, "JSON run config")->required();
    train_cmd->add_option("--out", train_out, "output CSV path")->required();

    auto* compare_cmd =
        app.add_subcommand("compare", "run several strategies on identical streams");
    std::string cmp_config, cmp_out, cmp_strategies;
    compare_cmd->add_option("--config", cmp_config, "JSON run config")->required();
    compare_cmd->add_option("--strategies", cmp_strategies, "comma-separated strategy tags")
        ->required();
    compare_cmd->add_option("--out", cmp_out, "output CSV path")->required();

    auto* memory_cmd = app.add_subcommand("memory-table", "print bytes/parameter per strategy");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*verify_cmd) {
            if (formats.empty()) formats = {"bf16", "fp8e4m3", "fp8e5m2"};
            return run_verify(formats, bf16_pairs, verify_seed);
        }
        if (*train_cmd || *compare_cmd) {
            const std::string path = *train_cmd ? train_config : cmp_config;
            collage::RunConfig config;
            try {
                config = collage::load_config(path);
                if (seed_override >= 0) config.seed = static_cast<uint64_t>(seed_override);
                if (record_every_override >= 1) config.record_every = record_every_override;
                config.validate();
            } catch (const std::invalid_argument& e) {
                std::fprintf(stderr, "%s\n", e.what());
                return 2;
            }
            if (*train_cmd) {
                collage::cmd_train(config, train_out);
                std::printf("wrote %s\n", train_out.c_str());
                return 0;
            }
            const auto strategies = split_csv_list(cmp_strategies);
            const auto summary = collage::cmd_compare(config, strategies, cmp_out);
            std::printf("%-10s %14s %14s %8s\n", "strategy", "final_loss", "mean_edq",
                        "bytes/p");
            for (const auto& s : summary)
                std::printf("%-10s %14.6e %14.6e %8d\n", s.strategy.c_str(), s.final_loss,
                            s.mean_edq, s.memory_bytes);
            std::printf("wrote %s\n", cmp_out.c_str());
            return 0;
        }
        if (*memory_cmd) {
            std::fputs(collage::memory_table_text().c_str(), stdout);
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    }
    return 2;
}
