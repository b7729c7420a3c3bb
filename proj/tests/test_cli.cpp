#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hogl/basis.hpp"
#include "hogl/io.hpp"
#include "hogl/rng.hpp"
#include "hogl/simulation.hpp"
#include "hogl/solver.hpp"

namespace fs = std::filesystem;
using hogl::Matrix;
using json = nlohmann::json;

namespace {

int run(const std::string& command) {
    const int status = std::system(command.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Workspace {
    fs::path dir;
    explicit Workspace(const std::string& name) {
        dir = fs::path("cli_test_tmp") / name;
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    std::string path(const std::string& file) const { return (dir / file).string(); }
};

const std::string kCli = HOGL_CLI_PATH;

// Small dataset written to CSVs; the same matrices stay available in memory
// for independent cross-checks.
struct Dataset {
    Matrix y, a_raw, x;
    hogl::BasisSpec basis;
    std::string y_path, a_path;
};

Dataset write_dataset(const Workspace& ws, int n = 60, int p = 8, int k = 5, int q = 4) {
    hogl::SimConfig config;
    config.n = n;
    config.p = p;
    config.k = k;
    config.q = std::max(q, 6);
    Dataset data;
    const auto grid = hogl::uniform_time_points(p);
    data.x = hogl::polynomial_basis(grid, q);
    data.basis = hogl::polynomial_spec(q);
    hogl::Rng rng(99);
    data.a_raw.resize(n, k);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) data.a_raw(i, j) = rng.uniform(-1.0, 1.0);
    }
    Matrix theta = Matrix::Zero(k, q);
    theta(0, q - 2) = 3.0;
    theta(0, q - 1) = -1.0;
    theta(1, q - 3) = 2.0;
    theta(1, q - 1) = 0.5;
    data.y = data.a_raw * theta * data.x.transpose();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) data.y(i, j) += rng.normal();
    }
    data.y_path = ws.path("Y.csv");
    data.a_path = ws.path("A.csv");
    hogl::write_csv_matrix(data.y_path, data.y, hogl::numbered_columns("y", p));
    hogl::write_csv_matrix(data.a_path, data.a_raw, hogl::numbered_columns("a", k));
    return data;
}

}  // namespace

TEST_CASE("cli: missing required input exits with code 2") {
    Workspace ws("missing_input");
    const int code = run(kCli + " fit --Y nothing.csv --lambda 1 2>" + ws.path("err.txt"));
    CHECK(code == 2);
    CHECK(slurp(ws.path("err.txt")).find("--A") != std::string::npos);
}

TEST_CASE("cli: unreadable file names the offending flag, exit 2") {
    Workspace ws("missing_file");
    const auto data = write_dataset(ws);
    const int code = run(kCli + " fit --Y " + data.y_path + " --A " + ws.path("absent.csv") +
                         " --q 4 --lambda 1 2>" + ws.path("err.txt"));
    CHECK(code == 2);
    CHECK(slurp(ws.path("err.txt")).find("--A") != std::string::npos);
}

TEST_CASE("cli: fit at lambda 0 reproduces an independent OLS solve") {
    Workspace ws("ols");
    const auto data = write_dataset(ws);
    const std::string out = ws.path("fit.json");
    const std::string theta_csv = ws.path("theta.csv");
    const int code = run(kCli + " fit --Y " + data.y_path + " --A " + data.a_path +
                         " --q 4 --route hogl2 --lambda 0 --tol 1e-10 --max-iter 100000 --out " +
                         out + " --theta-csv " + theta_csv + " >/dev/null");
    REQUIRE(code == 0);

    const auto prob = hogl::build_problem(data.y, data.a_raw, data.x, data.basis);
    const Matrix expected = hogl::ols_theta(prob);
    const Matrix got = hogl::read_csv_matrix(theta_csv);
    REQUIRE(got.rows() == expected.rows());
    CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("cli: theta CSV round-trips bit-exactly against the JSON") {
    Workspace ws("roundtrip");
    const auto data = write_dataset(ws);
    const std::string out = ws.path("fit.json");
    const std::string theta_csv = ws.path("theta.csv");
    REQUIRE(run(kCli + " fit --Y " + data.y_path + " --A " + data.a_path +
                " --q 4 --lambda 0.8 --delta 0.5 --out " + out + " --theta-csv " + theta_csv +
                " >/dev/null") == 0);
    const json result = json::parse(slurp(out));
    const Matrix parsed = hogl::read_csv_matrix(theta_csv);
    REQUIRE(parsed.rows() == static_cast<long>(result["theta"].size()));
    for (Eigen::Index i = 0; i < parsed.rows(); ++i) {
        for (Eigen::Index j = 0; j < parsed.cols(); ++j) {
            const double from_json = result["theta"][i][j].get<double>();
            CHECK(parsed(i, j) == from_json);  // bit-exact
        }
    }
}

TEST_CASE("cli: refitting at the reported lambda_max zeroes everything") {
    Workspace ws("lmax");
    const auto data = write_dataset(ws);
    const std::string out = ws.path("fit.json");
    REQUIRE(run(kCli + " fit --Y " + data.y_path + " --A " + data.a_path +
                " --q 4 --route hogl2 --delta 0.5 --lambda 1 --out " + out +
                " --theta-csv " + ws.path("t.csv") + " >/dev/null") == 0);
    const double lmax = json::parse(slurp(out))["lambda_max"].get<double>();
    REQUIRE(lmax > 0.0);

    const std::string out2 = ws.path("fit2.json");
    const std::string theta2 = ws.path("t2.csv");
    REQUIRE(run(kCli + " fit --Y " + data.y_path + " --A " + data.a_path +
                " --q 4 --route hogl2 --delta 0.5 --lambda " + hogl::format_double(lmax) +
                " --out " + out2 + " --theta-csv " + theta2 + " >/dev/null") == 0);
    const json result = json::parse(slurp(out2));
    CHECK(result["df"].get<long>() == 0);
    CHECK(hogl::read_csv_matrix(theta2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cli: tune with a pinned cell matches fit at that cell") {
    Workspace ws("pinned");
    const auto data = write_dataset(ws);
    const std::string base = " --Y " + data.y_path + " --A " + data.a_path +
                             " --q 4 --route hogl2 --delta 0.5 --lambda 1.25";
    REQUIRE(run(kCli + " fit" + base + " --out " + ws.path("f.json") + " --theta-csv " +
                ws.path("f.csv") + " >/dev/null") == 0);
    REQUIRE(run(kCli + " tune" + base + " --out " + ws.path("t.json") + " --theta-csv " +
                ws.path("t.csv") + " --grid-csv " + ws.path("g.csv") + " >/dev/null") == 0);
    CHECK(slurp(ws.path("f.csv")) == slurp(ws.path("t.csv")));
    // grid has a header plus exactly the one pinned cell
    CHECK(slurp(ws.path("g.csv")).find("0.5,1.25") != std::string::npos);
}

TEST_CASE("cli: tune grid has deltas x lambdas rows and a minimal best") {
    Workspace ws("grid");
    const auto data = write_dataset(ws);
    REQUIRE(run(kCli + " tune --Y " + data.y_path + " --A " + data.a_path +
                " --q 4 --route hogl2 --deltas 3 --lambdas 8 --out " + ws.path("t.json") +
                " --theta-csv " + ws.path("t.csv") + " --grid-csv " + ws.path("g.csv") +
                " >/dev/null") == 0);
    const std::string grid = slurp(ws.path("g.csv"));
    const long rows = std::count(grid.begin(), grid.end(), '\n');
    CHECK(rows == 1 + 3 * 8);

    const json best = json::parse(slurp(ws.path("t.json")));
    const double best_egcv = best["egcv"].get<double>();
    std::istringstream lines(grid);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        const auto first = line.find(',');
        const auto second = line.find(',', first + 1);
        const auto third = line.find(',', second + 1);
        const double cell_egcv = std::stod(line.substr(second + 1, third - second - 1));
        CHECK(best_egcv <= cell_egcv + 1e-12);
    }
}

TEST_CASE("cli: simulate is deterministic for a fixed seed") {
    Workspace ws("determinism");
    const std::string flags =
        " simulate --n 40 --p 8 --k 6 --q 6 --reps 1 --seed 7 --deltas 3 --lambdas 8";
    REQUIRE(run(kCli + flags + " --out-csv " + ws.path("m1.csv") + " --out-json " +
                ws.path("d1.json") + " >/dev/null") == 0);
    REQUIRE(run(kCli + flags + " --out-csv " + ws.path("m2.csv") + " --out-json " +
                ws.path("d2.json") + " >/dev/null") == 0);
    CHECK(slurp(ws.path("m1.csv")) == slurp(ws.path("m2.csv")));
    CHECK(slurp(ws.path("d1.json")) == slurp(ws.path("d2.json")));
}

TEST_CASE("cli: simulate preset runs both methods") {
    Workspace ws("preset");
    REQUIRE(run(kCli + " simulate --preset base-cell --reps 1 --seed 1 --deltas 2 --lambdas 5" +
                " --out-csv " + ws.path("m.csv") + " --out-json " + ws.path("d.json") +
                " >/dev/null") == 0);
    const std::string csv = slurp(ws.path("m.csv"));
    CHECK(csv.find("HOGL1") != std::string::npos);
    CHECK(csv.find("HOGL2") != std::string::npos);
}

TEST_CASE("cli: simulate rejects impossible dimensions with exit 2") {
    CHECK(run(kCli + " simulate --n 10 --k 20 --reps 1 2>/dev/null >/dev/null") == 2);
    CHECK(run(kCli + " simulate --q 5 --reps 1 2>/dev/null >/dev/null") == 2);
}

TEST_CASE("cli: out-of-range numeric options exit with code 2") {
    Workspace ws("bad_numeric");
    const auto data = write_dataset(ws);
    const std::string base = " --Y " + data.y_path + " --A " + data.a_path + " --q 4";
    CHECK(run(kCli + " fit" + base + " --lambda -1 2>/dev/null") == 2);
    CHECK(run(kCli + " fit" + base + " --delta 1.5 --lambda 1 2>/dev/null") == 2);
}

TEST_CASE("cli: degenerate data surfaces as a solver failure, exit 3") {
    Workspace ws("singular");
    const auto data = write_dataset(ws);
    // responses lying inside span{1, A} leave no residual for the covariance
    Matrix flat = data.a_raw * Matrix::Constant(data.a_raw.cols(), data.y.cols(), 0.5);
    flat.rowwise() += Eigen::RowVectorXd::LinSpaced(data.y.cols(), 1.0, 2.0);
    const std::string y_path = ws.path("Y_flat.csv");
    hogl::write_csv_matrix(y_path, flat, hogl::numbered_columns("y", static_cast<int>(flat.cols())));
    const int code = run(kCli + " fit --Y " + y_path + " --A " + data.a_path +
                         " --q 4 --lambda 1 2>" + ws.path("err.txt"));
    CHECK(code == 3);
}

TEST_CASE("cli: prox-check passes clean and fails the negative control") {
    CHECK(run(kCli + " prox-check --count 200 --seed 5 >/dev/null") == 0);
    CHECK(run(kCli + " prox-check --count 50 --seed 5 --inject-fault >/dev/null") == 1);
    CHECK(run(kCli + " prox-check --count 100 --q 1 --seed 5 >/dev/null") == 0);
}

TEST_CASE("cli: JSON config supplies defaults, flags override") {
    Workspace ws("config");
    const auto data = write_dataset(ws);
    {
        std::ofstream cfg(ws.path("cfg.json"));
        cfg << R"({"q": 4, "route": "hogl2", "lambda": 1.0, "delta": 0.5})";
    }
    // config drives everything except --lambda, which the flag overrides
    const std::string out = ws.path("fit.json");
    REQUIRE(run(kCli + " fit --config " + ws.path("cfg.json") + " --Y " + data.y_path + " --A " +
                data.a_path + " --lambda 2.5 --out " + out + " --theta-csv " + ws.path("t.csv") +
                " >/dev/null") == 0);
    const json result = json::parse(slurp(out));
    CHECK(result["lambda"].get<double>() == 2.5);
    CHECK(result["delta"].get<double>() == 0.5);
}
