#include "calql/harness/runlog.hpp"

#include <cstdio>
#include <fstream>

#include "calql/common.hpp"
#include "calql/rng.hpp"

namespace calql::harness {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* phase_name(agents::Phase p) { return p == agents::Phase::Offline ? "offline" : "online"; }

}  // namespace

RunLog::RunLog(const std::string& config_hash, std::uint64_t seed, const std::string& code_version) {
    text_ += "{\"type\":\"header\",\"config_hash\":\"" + config_hash +
             "\",\"seed\":" + std::to_string(seed) + ",\"code_version\":\"" + code_version + "\"}\n";
}

void RunLog::add_eval(const RunRecord& rec) {
    const int pi = rec.phase == agents::Phase::Offline ? 0 : 1;
    require(rec.step > last_step_[pi], ErrorKind::InvalidArgument,
            "eval records must be strictly increasing in step");
    last_step_[pi] = rec.step;
    records_.push_back(rec);
    text_ += "{\"type\":\"eval\",\"step\":" + std::to_string(rec.step) + ",\"phase\":\"" +
             phase_name(rec.phase) + "\",\"score\":" + num(rec.normalized_score) +
             ",\"avg_dataset_q\":" + num(rec.avg_dataset_q) +
             ",\"bounding_rate\":" + num(rec.bounding_rate) +
             ",\"cum_regret\":" + num(rec.cum_regret_metric) + "}\n";
}

void RunLog::add_train(long step, agents::Phase phase, double critic_loss, double actor_loss,
                       double reg_value, double alpha, double temperature) {
    text_ += "{\"type\":\"train\",\"step\":" + std::to_string(step) + ",\"phase\":\"" +
             phase_name(phase) + "\",\"critic_loss\":" + num(critic_loss) +
             ",\"actor_loss\":" + num(actor_loss) + ",\"reg\":" + num(reg_value) +
             ",\"alpha\":" + num(alpha) + ",\"temperature\":" + num(temperature) + "}\n";
}

std::uint64_t RunLog::content_hash() const { return detail::fnv1a64(text_); }

void RunLog::write(const std::string& path) const {
    std::ofstream os(path);
    require(os.good(), ErrorKind::IoError, "cannot open for writing: " + path);
    os << text_;
    require(os.good(), ErrorKind::IoError, "write failed: " + path);
}

std::vector<double> RunLog::scores(agents::Phase phase) const {
    std::vector<double> out;
    for (const RunRecord& r : records_)
        if (r.phase == phase) out.push_back(r.normalized_score);
    return out;
}

}  // namespace calql::harness
