#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path& work() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "orthovar_test_cli";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string at(const std::string& name) { return (work() / name).string(); }

int run(const std::string& args) {
    const std::string cmd = std::string(ORTHOVAR_BIN) + " " + args + " >" + at("stdout.txt") + " 2>" + at("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Data rows of a CSV written by the tool: header first, "# " metadata last.
std::vector<std::vector<std::string>> rows(const std::string& path, std::vector<std::string>* header = nullptr) {
    std::istringstream in(slurp(path));
    std::vector<std::vector<std::string>> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        if (first) {
            if (header) *header = cells;
            first = false;
        } else {
            out.push_back(cells);
        }
    }
    return out;
}

std::string column(const std::vector<std::string>& header, const std::vector<std::string>& row, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return row.at(i);
    FAIL("missing column " << name);
    return {};
}

}  // namespace

TEST_CASE("fixture writes a half-sphere mesh with fixed counts") {
    REQUIRE(run("fixture halfsphere --level 4 --out " + at("h4.off")) == 0);
    std::istringstream in(slurp(at("h4.off")));
    std::string magic;
    int V, F, E;
    in >> magic >> V >> F >> E;
    CHECK(magic == "OFF");
    CHECK(V == 545);
    CHECK(F == 1024);
}

TEST_CASE("energy of the half-sphere is 8 pi within 2%") {
    REQUIRE(run("fixture halfsphere --level 4 --out " + at("h4.off")) == 0);
    REQUIRE(run("energy --mesh " + at("h4.off") + " --p 2 --out " + at("energy.csv")) == 0);
    std::vector<std::string> h;
    const auto r = rows(at("energy.csv"), &h);
    REQUIRE(r.size() == 1);
    CHECK(std::stod(column(h, r[0], "energy_B_p")) == doctest::Approx(8 * M_PI).epsilon(0.02));
    const std::string text = slurp(at("energy.csv"));
    CHECK(text.find("# config_hash=") != std::string::npos);
}

TEST_CASE("slices find on the ellipsoid gives three rows") {
    REQUIRE(run("fixture ellipsoid --axes 1,1.2,1.5 --out " + at("ellipsoid.cfg")) == 0);
    REQUIRE(run("slices find --domain " + at("ellipsoid.cfg") + " --m 2 --tol 1e-6 --out " + at("slices.csv") +
                " --export-dir " + at("slices")) == 0);
    CHECK(rows(at("slices.csv")).size() == 3);
    CHECK(fs::exists(at("slices/slice0_0.off")));
}

TEST_CASE("fixture domain configs") {
    REQUIRE(run("fixture annulus_prism --smooth 0.05 --out " + at("prism.cfg")) == 0);
    const std::string prism = slurp(at("prism.cfg"));
    CHECK(prism.find("kind = annulus_prism") != std::string::npos);
    CHECK(prism.find("smooth = 0.05") != std::string::npos);
    REQUIRE(run("fixture graph_cap --trh 2.0 --out " + at("cap.cfg")) == 0);
    CHECK(slurp(at("cap.cfg")).find("kind = graph_cap") != std::string::npos);
}

TEST_CASE("compare sweep is deterministic and dips below 8 pi") {
    REQUIRE(run("fixture graph_cap --trh 2.0 --out " + at("cap.cfg")) == 0);
    REQUIRE(run("compare --graph " + at("cap.cfg") + " --lambda-sweep 0:0.2:0.05 --out " + at("cmp1.csv")) == 0);
    REQUIRE(run("compare --graph " + at("cap.cfg") + " --lambda-sweep 0:0.2:0.05 --out " + at("cmp2.csv")) == 0);
    CHECK(slurp(at("cmp1.csv")) == slurp(at("cmp2.csv")));
    std::vector<std::string> h;
    const auto r = rows(at("cmp1.csv"), &h);
    REQUIRE(r.size() == 5);
    CHECK(std::stod(column(h, r[4], "energy_B_2")) < 8 * M_PI * 0.995);
    REQUIRE(run("compare --graph trh=2 --lambda-sweep 0:0.2:0.05 --out " + at("cmp3.csv")) == 0);
    CHECK(rows(at("cmp3.csv")) == r);
}

TEST_CASE("minimize and reflect check") {
    REQUIRE(run("fixture ball --out " + at("ball.cfg")) == 0);
    REQUIRE(run("fixture ball_section --level 2 --height 0 --out " + at("disk.off")) == 0);
    REQUIRE(run("minimize --domain " + at("ball.cfg") + " --start " + at("disk.off") + " --out " + at("trace.csv") +
                " --final " + at("final.off")) == 0);
    CHECK(rows(at("trace.csv")).size() == 1);
    CHECK(slurp(at("final.off")) == slurp(at("disk.off")));
    REQUIRE(run("fixture halfsphere --level 4 --out " + at("h4.off")) == 0);
    REQUIRE(run("reflect check --domain " + at("ball.cfg") + " --mesh " + at("h4.off") + " --out " + at("refl.csv")) == 0);
    std::vector<std::string> h;
    const auto r = rows(at("refl.csv"), &h);
    REQUIRE(r.size() == 1);
    CHECK(std::stod(column(h, r[0], "energy_W")) == doctest::Approx(16 * M_PI).epsilon(0.05));
}

TEST_CASE("perturb generic writes a reloadable slice-free domain") {
    REQUIRE(run("fixture ellipsoid --out " + at("ellipsoid.cfg")) == 0);
    REQUIRE(run("perturb generic --domain " + at("ellipsoid.cfg") + " --step 1e-2 --seed 7 --out " + at("pert.cfg")) == 0);
    CHECK(slurp(at("pert.cfg")).find("kind = perturbed") != std::string::npos);
    REQUIRE(run("slices find --domain " + at("pert.cfg") + " --out " + at("pert_slices.csv")) == 0);
    CHECK(rows(at("pert_slices.csv")).empty());
}

TEST_CASE("exit codes: 2 for validation failures, 3 for numerical failures") {
    CHECK(run("fixture dodecahedron") == 2);
    CHECK(slurp(at("stderr.txt")).find("UnknownFixture") != std::string::npos);
    CHECK(run("energy --mesh " + at("does_not_exist.off")) == 2);
    CHECK(run("bogus") == 2);
    CHECK(run("slices find --domain " + at("ball.cfg") + " --tol -1") == 2);

    std::ofstream(at("typo.cfg")) << "[domain]\nkind = ball\nradus = 1\n";
    CHECK(run("slices find --domain " + at("typo.cfg")) == 2);
    CHECK(slurp(at("stderr.txt")).find("radus") != std::string::npos);

    std::ofstream(at("opts.ini")) << "[energy]\nmesh = " << at("h4.off") << "\nflavour = 3\n";
    CHECK(run("energy --config " + at("opts.ini")) == 2);

    REQUIRE(run("fixture ball --out " + at("ball.cfg")) == 0);
    REQUIRE(run("fixture disk --level 2 --radius 0.5 --out " + at("small.off")) == 0);
    CHECK(run("reflect check --domain " + at("ball.cfg") + " --mesh " + at("small.off")) == 3);
    CHECK(slurp(at("stderr.txt")).find("BoundaryNotOnSurface") != std::string::npos);
}
