#include "collage/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace collage {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const char* where,
                    std::initializer_list<const char*> known) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok)
            throw std::invalid_argument(std::string("config: unknown key '") + key + "' in " +
                                        where);
    }
}

template <typename T>
void get_if_present(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).template get<T>();
}

Schedule parse_schedule(const json& j) {
    reject_unknown(j, "hp.schedule", {"type", "warmup_steps", "total_steps", "min_factor"});
    Schedule s;
    std::string type = "constant";
    get_if_present(j, "type", type);
    if (type == "constant") {
        s.kind = Schedule::Kind::kConstant;
    } else if (type == "cosine-warmup") {
        s.kind = Schedule::Kind::kCosineWarmup;
    } else {
        throw std::invalid_argument("config: unknown schedule type '" + type + "'");
    }
    get_if_present(j, "warmup_steps", s.warmup_steps);
    get_if_present(j, "total_steps", s.total_steps);
    get_if_present(j, "min_factor", s.min_factor);
    return s;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17e", v);
    return buf;
}

void write_file_atomically(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open output file: " + tmp);
        out << content;
        if (!out) {
            std::filesystem::remove(tmp);
            throw std::runtime_error("failed writing output file: " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    reject_unknown(j, "the top level",
                   {"schema_version", "task", "strategy", "hp", "steps", "batch_size", "seed",
                    "grad_scale", "record_every"});
    if (!j.contains("schema_version"))
        throw std::invalid_argument("config: missing schema_version");
    if (j.at("schema_version").get<int>() != 1)
        throw std::invalid_argument("config: unsupported schema_version");

    RunConfig c;
    if (j.contains("task")) {
        const json& t = j.at("task");
        reject_unknown(t, "task",
                       {"kind", "input_dim", "hidden_dim", "n_samples", "noise_std", "seed"});
        std::string kind = task_kind_name(c.task.kind);
        get_if_present(t, "kind", kind);
        c.task.kind = task_kind_from_name(kind);
        get_if_present(t, "input_dim", c.task.input_dim);
        get_if_present(t, "hidden_dim", c.task.hidden_dim);
        get_if_present(t, "n_samples", c.task.n_samples);
        get_if_present(t, "noise_std", c.task.noise_std);
        get_if_present(t, "seed", c.task.seed);
    }
    if (j.contains("strategy")) {
        const json& s = j.at("strategy");
        reject_unknown(s, "strategy", {"tag", "work_format", "high_format"});
        std::string tag = strategy_tag_name(c.strategy.tag);
        get_if_present(s, "tag", tag);
        c.strategy.tag = strategy_tag_from_name(tag);
        std::string wf(c.strategy.work_format->name), hf(c.strategy.high_format->name);
        get_if_present(s, "work_format", wf);
        get_if_present(s, "high_format", hf);
        c.strategy.work_format = &format_by_name(wf);
        c.strategy.high_format = &format_by_name(hf);
    }
    if (j.contains("hp")) {
        const json& h = j.at("hp");
        reject_unknown(h, "hp",
                       {"alpha", "beta1", "beta2", "epsilon", "lambda", "schedule",
                        "eps_inside_sqrt", "clip_norm"});
        get_if_present(h, "alpha", c.hp.alpha);
        get_if_present(h, "beta1", c.hp.beta1);
        get_if_present(h, "beta2", c.hp.beta2);
        get_if_present(h, "epsilon", c.hp.epsilon);
        get_if_present(h, "lambda", c.hp.lambda);
        get_if_present(h, "eps_inside_sqrt", c.hp.eps_inside_sqrt);
        get_if_present(h, "clip_norm", c.hp.clip_norm);
        if (h.contains("schedule")) c.hp.schedule = parse_schedule(h.at("schedule"));
    }
    get_if_present(j, "steps", c.steps);
    get_if_present(j, "batch_size", c.batch_size);
    get_if_present(j, "seed", c.seed);
    get_if_present(j, "grad_scale", c.grad_scale);
    get_if_present(j, "record_every", c.record_every);
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string records_to_csv(const std::vector<std::pair<std::string, MetricsRecord>>& rows) {
    std::string out = "# schema_version=1\n";
    out += "step,strategy,loss,edq,intended_norm,effective_norm,imprecision_pct,param_norm\n";
    char step_buf[24];
    for (const auto& [strategy, r] : rows) {
        std::snprintf(step_buf, sizeof(step_buf), "%" PRId64, r.step);
        out += step_buf;
        out += ',';
        out += strategy;
        for (double v :
             {r.loss, r.edq, r.intended_norm, r.effective_norm, r.imprecision_pct, r.param_norm}) {
            out += ',';
            out += fmt_double(v);
        }
        out += '\n';
    }
    return out;
}

void cmd_train(const RunConfig& config, const std::string& out_path) {
    const auto records = run(config);
    std::vector<std::pair<std::string, MetricsRecord>> rows;
    rows.reserve(records.size());
    const std::string tag = strategy_tag_name(config.strategy.tag);
    for (const auto& r : records) rows.emplace_back(tag, r);
    write_file_atomically(out_path, records_to_csv(rows));
}

std::vector<CompareSummary> cmd_compare(const RunConfig& config,
                                        const std::vector<std::string>& strategy_names,
                                        const std::string& out_path) {
    if (strategy_names.empty())
        throw std::invalid_argument("compare: at least one strategy required");
    const Dataset data = gen_synthetic(config.task);
    const LpTensor params =
        init_params(config.task, *config.strategy.work_format, config.seed);

    std::vector<std::vector<MetricsRecord>> all;
    std::vector<std::string> tags;
    for (const auto& name : strategy_names) {
        RunConfig c = config;
        c.strategy.tag = strategy_tag_from_name(name);
        all.push_back(run_on(c, data, params));
        tags.push_back(strategy_tag_name(c.strategy.tag));
    }

    // rows interleaved by step, then strategy in the given order
    std::vector<std::pair<std::string, MetricsRecord>> rows;
    for (size_t k = 0; k < all.front().size(); ++k)
        for (size_t s = 0; s < all.size(); ++s) rows.emplace_back(tags[s], all[s][k]);
    write_file_atomically(out_path, records_to_csv(rows));

    std::vector<CompareSummary> summary;
    for (size_t s = 0; s < all.size(); ++s) {
        CompareSummary cs;
        cs.strategy = tags[s];
        cs.final_loss = all[s].back().loss;
        double sum = 0;
        size_t cnt = 0;
        for (const auto& r : all[s])
            if (r.step > 0) {
                sum += r.edq;
                ++cnt;
            }
        cs.mean_edq = cnt ? sum / double(cnt) : 0.0;
        Strategy st = config.strategy;
        st.tag = strategy_tag_from_name(tags[s]);
        cs.memory_bytes = memory_bytes_per_param(st);
        summary.push_back(cs);
    }
    return summary;
}

std::string memory_table_text() {
    std::string out = "strategy  bytes/parameter\n";
    for (const char* tag : {"A", "B", "C", "D-MW-off", "D", "kahan", "sr"}) {
        Strategy s;
        s.tag = strategy_tag_from_name(tag);
        char line[64];
        std::snprintf(line, sizeof(line), "%-9s %d\n", tag, memory_bytes_per_param(s));
        out += line;
    }
    return out;
}

}  // namespace collage
