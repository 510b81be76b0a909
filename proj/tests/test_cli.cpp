// Drives the installed CLI binary end to end through a shell; the binary path
// comes in through POLARD_CLI_BIN from the build.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace polard;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(POLARD_CLI_BIN) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("polard_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

}  // namespace

TEST_CASE("compute on the identity without a direction") {
    TempDir tmp;
    const fs::path a = tmp.path / "a.mtx";
    write_matrix_file(a.string(), Matrix::identity(4));
    const fs::path u = tmp.path / "u.mtx";
    const RunResult r = run_cli("compute " + a.string() + " --out " + u.string(), tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("converged:  yes") != std::string::npos);
    const Matrix got = read_matrix_file(u.string());
    CHECK(frobenius_norm(got - Matrix::identity(4)) <= 1e-14);
}

TEST_CASE("compute writes both factors and reports residuals") {
    TempDir tmp;
    const fs::path u = tmp.path / "u.mtx";
    const RunResult r = run_cli(
        "compute --gallery frank -n 16 --seed 1 --out " + u.string(), tmp.path);
    CHECK(r.exit_code == 0);  // the factor converges even though kappa ~ 2e14
    CHECK(r.out.find("beta:") != std::string::npos);
    const Matrix got_u = read_matrix_file(u.string());
    CHECK(frobenius_norm(got_u.adjoint() * got_u - Matrix::identity(16)) <= 1e-13);
    const Matrix got_k = read_matrix_file(u.string() + ".deriv");
    CHECK(got_k.rows() == 16);
}

TEST_CASE("compute via the oracle methods agrees with the iteration") {
    TempDir tmp;
    const fs::path a = tmp.path / "a.mtx";
    const fs::path e = tmp.path / "e.mtx";
    write_matrix_file(a.string(), testutil::random_well_conditioned(6, 42, 50.0));
    write_matrix_file(e.string(), random_gaussian(6, 6, 5100042, Field::real));
    const fs::path u1 = tmp.path / "u1.mtx";
    const fs::path u2 = tmp.path / "u2.mtx";
    CHECK(run_cli("compute " + a.string() + " " + e.string() + " --method svd --out " +
                      u1.string(),
                  tmp.path)
              .exit_code == 0);
    CHECK(run_cli("compute " + a.string() + " " + e.string() + " --method newton --out " +
                      u2.string(),
                  tmp.path)
              .exit_code == 0);
    const Matrix k1 = read_matrix_file(u1.string() + ".deriv");
    const Matrix k2 = read_matrix_file(u2.string() + ".deriv");
    CHECK(testutil::rel_diff(k2, k1) <= 1e-11);
}

TEST_CASE("malformed input exits 1 with a line-numbered diagnostic") {
    TempDir tmp;
    const fs::path bad = tmp.path / "bad.mtx";
    std::ofstream(bad) << "2 2 real\n1 2\n3\n";
    const RunResult r = run_cli("compute " + bad.string(), tmp.path);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("rank-deficient input is a reported numerical failure, not a crash") {
    TempDir tmp;
    const fs::path a = tmp.path / "a.mtx";
    std::ofstream(a) << "2 2 real\n1 1\n1 1\n";
    const RunResult r = run_cli("compute " + a.string(), tmp.path);
    CHECK(r.exit_code == 2);
    CHECK(!r.err.empty());
}

TEST_CASE("newton-schulz divergence surfaces as exit 2") {
    TempDir tmp;
    const fs::path a = tmp.path / "a.mtx";
    write_matrix_file(a.string(), Matrix::identity(3) * 2.0);  // sigma = 2 everywhere
    const RunResult r = run_cli("compute " + a.string() + " --method newton-schulz", tmp.path);
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("converged:  no") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
    TempDir tmp;
    CHECK(run_cli("compute", tmp.path).exit_code == 1);  // no input source
    CHECK(run_cli("compute --gallery nosuch -n 4", tmp.path).exit_code == 1);
    CHECK(run_cli("trace --gallery frank -n 16 --method svd", tmp.path).exit_code == 1);
    const fs::path a = tmp.path / "a.mtx";
    write_matrix_file(a.string(), Matrix::identity(3));
    CHECK(run_cli("compute " + a.string() + " --gallery frank -n 4", tmp.path).exit_code == 1);
}

TEST_CASE("gallery emits the shared matrix format") {
    TempDir tmp;
    const fs::path out = tmp.path / "b.mtx";
    const RunResult r =
        run_cli("gallery --name binomial -n 8 --out " + out.string(), tmp.path);
    CHECK(r.exit_code == 0);
    const Matrix b = read_matrix_file(out.string());
    CHECK(testutil::rel_diff(b, binomial(8)) == 0.0);

    // stdout emission parses as well
    const RunResult r2 = run_cli("gallery --name rect-binomial -n 5 -m 16", tmp.path);
    CHECK(r2.exit_code == 0);
    std::istringstream body(r2.out);
    const Matrix rect = read_matrix(body);
    CHECK(rect.rows() == 16);
    CHECK(rect.cols() == 5);
}

TEST_CASE("trace CSV output is byte-identical across runs") {
    TempDir tmp;
    const std::string args = "trace --gallery binomial -n 12 --seed 5 --diagnostic --format csv";
    const RunResult r1 = run_cli(args, tmp.path);
    const RunResult r2 = run_cli(args, tmp.path);
    CHECK(r1.exit_code == 0);
    CHECK(r1.out == r2.out);
    CHECK(r1.out.rfind("k,alpha,beta,gamma,mu,err_x,err_e,beta_exact,gamma_exact", 0) == 0);
}

TEST_CASE("trace on the nearly orthogonal matrix converges to tiny errors") {
    TempDir tmp;
    const fs::path csv = tmp.path / "moler.csv";
    const RunResult r = run_cli(
        "trace --gallery moler-orth -n 16 --seed 1 --diagnostic --format csv --out " +
            csv.string(),
        tmp.path);
    CHECK(r.exit_code == 0);
    std::istringstream lines(slurp(csv));
    std::string line, last;
    std::getline(lines, line);  // header
    while (std::getline(lines, line))
        if (!line.empty()) last = line;
    std::vector<std::string> cells;
    std::istringstream cell_in(last);
    std::string cell;
    while (std::getline(cell_in, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 9);
    CHECK(std::stod(cells[5]) <= 1e-13);  // err_x
    CHECK(std::stod(cells[6]) <= 1e-13);  // err_e
    CHECK(std::abs(std::stod(cells[4]) - 1.0) <= 0.1);  // mu -> 1 near convergence
}

TEST_CASE("trace on the frank matrix shows the corrupted-derivative phenomenon") {
    TempDir tmp;
    const fs::path csv = tmp.path / "frank.csv";
    const RunResult r = run_cli(
        "trace --gallery frank -n 16 --seed 1 --diagnostic --format csv --out " + csv.string(),
        tmp.path);
    CHECK(r.exit_code == 0);
    // pull err_x and err_e from the last CSV row
    std::istringstream lines(slurp(csv));
    std::string line, last;
    std::getline(lines, line);  // header
    while (std::getline(lines, line))
        if (!line.empty()) last = line;
    std::vector<std::string> cells;
    std::istringstream cell_in(last);
    std::string cell;
    while (std::getline(cell_in, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 9);
    const double err_x = std::stod(cells[5]);
    const double err_e = std::stod(cells[6]);
    CHECK(err_x <= 1e-8);
    CHECK(err_e >= 1e-6);
}

TEST_CASE("verify suites pass and the negative control fails") {
    TempDir tmp;
    CHECK(run_cli("verify --suite identities --seed 7 --trials 5", tmp.path).exit_code == 0);
    CHECK(run_cli("verify --suite oracles --trials 2", tmp.path).exit_code == 0);
    CHECK(run_cli("verify --suite appendix --trials 3", tmp.path).exit_code == 0);
    const RunResult neg = run_cli("verify --suite oracles --trials 2 --cd-h 0.5", tmp.path);
    CHECK(neg.exit_code != 0);
    CHECK(neg.out.find("FAIL") != std::string::npos);
}

TEST_CASE("condition subcommand reports the polar condition numbers") {
    TempDir tmp;
    const RunResult r = run_cli("condition --gallery frank-modified -n 16", tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("kappa real square") != std::string::npos);
    // the real-square value sits near 2.9e12
    const auto pos = r.out.find("kappa real square:");
    const std::string tail = r.out.substr(pos);
    CHECK(tail.find("e+12") != std::string::npos);
}
