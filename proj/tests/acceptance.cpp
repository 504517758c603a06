#include "orthovar/selftest.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace orthovar;

namespace {

std::string one_line(const CriterionResult& c) {
    char head[160];
    std::snprintf(head, sizeof head, "[%s] criterion %2d: %s:", (c.time_limit > 0 ? c.pass() : c.metrics_pass()) ? "PASS" : "FAIL", c.id, c.title.c_str());
    std::string out = head;
    if (!c.error.empty()) out += " error: " + c.error + ";";
    for (const auto& m : c.metrics) {
        char buf[200];
        std::snprintf(buf, sizeof buf, " %s%s = %.4g %s %.4g;", m.pass ? "" : "!", m.name.c_str(), m.value,
                      m.relation.c_str(), m.threshold);
        out += buf;
    }
    char tail[64];
    if (c.time_limit > 0)
        std::snprintf(tail, sizeof tail, " %.1f s (limit %.0f s)", c.seconds, c.time_limit);
    else
        std::snprintf(tail, sizeof tail, " %.1f s", c.seconds);
    return out + tail;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const fs::path& dir) {
    fs::remove_all(dir);
    const std::string cmd = std::string(ORTHOVAR_BIN) + " selftest --seed 7 --out-dir " + dir.string() + " > " +
                            (dir.string() + ".log") + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Both runs exit cleanly and write the same set of CSV files with identical bytes.
CriterionResult determinism() {
    CriterionResult r;
    r.id = 12;
    r.title = "orthovar selftest twice with seed 7 gives byte-identical CSVs";
    r.time_limit = 0;
    const fs::path base = fs::path(ACCEPTANCE_WORK_DIR);
    fs::create_directories(base);
    const fs::path a = base / "selftest_run1", b = base / "selftest_run2";
    const int ra = run_cli(a), rb = run_cli(b);
    std::set<std::string> fa, fb;
    for (const auto& e : fs::directory_iterator(a))
        if (e.path().extension() == ".csv") fa.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(b))
        if (e.path().extension() == ".csv") fb.insert(e.path().filename().string());
    int differing = 0;
    for (const auto& f : fa)
        if (!fb.count(f) || slurp(a / f) != slurp(b / f)) ++differing;
    auto add = [&](const std::string& name, double value, const std::string& rel, double threshold, bool pass) {
        r.metrics.push_back({name, value, rel, threshold, pass});
    };
    add("exit code of run 1", ra, "==", 0, ra == 0);
    add("exit code of run 2", rb, "==", 0, rb == 0);
    add("CSV files written", static_cast<double>(fa.size()), ">", 1, fa.size() > 1 && fa.count("summary.csv"));
    add("CSV file sets equal", fa == fb ? 1 : 0, "==", 1, fa == fb);
    add("CSV files differing", differing, "==", 0, differing == 0);
    return r;
}

}  // namespace

int main() {
    SelftestOptions opt;
    opt.seed = 7;
    const SelftestReport rep = run_selftest(opt);
    bool all = rep.pass();
    for (const auto& c : rep.criteria) std::printf("%s\n", one_line(c).c_str());
    std::fflush(stdout);

    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult det = determinism();
    det.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s\n", one_line(det).c_str());
    all = all && det.metrics_pass() && rep.criteria.size() == 11;

    std::printf("acceptance: %s\n", all ? "all 12 criteria passed" : "FAILED");
    return all ? 0 : 1;
}
