#include "calql/harness/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "calql/common.hpp"

namespace calql::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct SeriesSet {
    // metric -> step -> values across seeds
    std::map<std::string, std::map<long, std::vector<double>>> data;
    int n_seeds = 0;
};

void write_metric_csv(const std::string& path, const std::map<long, std::vector<double>>& series,
                      int n_seeds, std::vector<std::string>& written,
                      std::vector<std::string>& warnings, const std::string& label) {
    // Keep only steps present for every seed (grid intersection).
    std::map<long, std::vector<double>> aligned;
    bool mismatch = false;
    for (const auto& [step, vals] : series) {
        if (static_cast<int>(vals.size()) == n_seeds)
            aligned[step] = vals;
        else
            mismatch = true;
    }
    if (mismatch)
        warnings.push_back("step grids differ across seeds for " + label + "; aligned by intersection");
    if (aligned.empty()) return;

    std::ofstream os(path);
    require(os.good(), ErrorKind::IoError, "cannot open for writing: " + path);
    os << "step,mean,stderr,n_seeds\n";
    for (const auto& [step, vals] : aligned) {
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        const double stderr_v =
            vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1) /
                                        static_cast<double>(vals.size()))
                            : 0.0;
        os << step << ',' << num(mean) << ',' << num(stderr_v) << ',' << vals.size() << "\n";
    }
    written.push_back(path);
}

}  // namespace

PlotEmitReport emit_plot_data(const std::string& runs_dir, const std::string& out_dir) {
    require(fs::is_directory(runs_dir), ErrorKind::IoError, "runs dir not found: " + runs_dir);
    fs::create_directories(out_dir);
    PlotEmitReport report;

    // group key: config hash (+ phase folded into the metric name)
    std::map<std::string, SeriesSet> run_groups;
    std::map<std::string, SeriesSet> theory_groups;

    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(runs_dir)) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());

    int n_logs = 0;
    for (const fs::path& p : entries) {
        if (p.extension() == ".jsonl") {
            std::ifstream is(p);
            require(is.good(), ErrorKind::IoError, "cannot open: " + p.string());
            std::string line;
            std::string hash = "unknown";
            SeriesSet* group = nullptr;
            while (std::getline(is, line)) {
                if (line.empty()) continue;
                json j = json::parse(line, nullptr, false);
                if (j.is_discarded()) {
                    report.warnings.push_back("skipping unparseable line in " + p.string());
                    continue;
                }
                const std::string type = j.value("type", "");
                if (type == "header") {
                    hash = j.value("config_hash", "unknown");
                    group = &run_groups[hash];
                    group->n_seeds += 1;
                } else if (type == "eval" && group != nullptr) {
                    const long step = j.value("step", 0L);
                    const std::string phase = j.value("phase", "offline");
                    for (const char* metric : {"score", "avg_dataset_q", "bounding_rate", "cum_regret"})
                        group->data[std::string(metric) + "_" + phase][step].push_back(
                            j.value(metric, 0.0));
                }
            }
            ++n_logs;
        } else if (p.string().size() > 11 &&
                   p.string().substr(p.string().size() - 11) == ".theory.csv") {
            std::ifstream is(p);
            require(is.good(), ErrorKind::IoError, "cannot open: " + p.string());
            std::string line;
            require(static_cast<bool>(std::getline(is, line)), ErrorKind::ParseError,
                    "empty theory csv: " + p.string());
            bool counted = false;
            while (std::getline(is, line)) {
                if (line.empty()) continue;
                std::istringstream ls(line);
                std::string field;
                std::vector<std::string> f;
                while (std::getline(ls, field, ',')) f.push_back(field);
                if (f.size() != 7) continue;
                const std::string key = "calibrate_" + f[5];
                SeriesSet& group = theory_groups[key];
                if (!counted) {
                    group.n_seeds += 1;
                    counted = true;
                }
                const long k = std::stol(f[0]);
                group.data["term_i"][k].push_back(std::stod(f[1]));
                group.data["term_ii"][k].push_back(std::stod(f[2]));
                group.data["regret"][k].push_back(std::stod(f[3]));
                group.data["cum_regret"][k].push_back(std::stod(f[4]));
            }
            ++n_logs;
        }
    }
    require(n_logs > 0, ErrorKind::EmptyDataset, "no run logs or theory tables in " + runs_dir);

    for (auto& [hash, group] : run_groups)
        for (auto& [metric, series] : group.data)
            write_metric_csv((fs::path(out_dir) / (hash + "_" + metric + ".csv")).string(), series,
                             group.n_seeds, report.written, report.warnings, hash + "/" + metric);
    for (auto& [key, group] : theory_groups)
        for (auto& [metric, series] : group.data)
            write_metric_csv((fs::path(out_dir) / ("theory_" + key + "_" + metric + ".csv")).string(),
                             series, group.n_seeds, report.written, report.warnings, key + "/" + metric);
    return report;
}

}  // namespace calql::harness
