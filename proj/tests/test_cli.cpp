#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

// Black-box tests against the installed binary; TDSC_CLI_PATH is injected by
// the build so the tests always exercise the freshly built tool.
#ifndef TDSC_CLI_PATH
#error "TDSC_CLI_PATH must point at the command-line binary"
#endif

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const fs::path out_file = fs::temp_directory_path() / "tdsc_cli_capture.txt";
    const std::string cmd =
        std::string(TDSC_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    fs::remove(out_file);
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Scratch directory rebuilt per test case.
struct Scratch {
    fs::path dir;
    Scratch() : dir(fs::temp_directory_path() / "tdsc_cli_scratch") {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

// Small labeled sequence on disk, shared setup for train-based cases.
std::string make_features(const Scratch& scratch, const std::string& extra = "") {
    const std::string path = scratch / "seq.csv";
    const RunResult r = run_cli("synth --out " + path +
                                " --dim 12 --subspace-dim 2 --k 3 "
                                "--segments 12,12,12 --sigma 0.01 --seed 0 " +
                                extra);
    REQUIRE(r.code == 0);
    return path;
}

const std::string kSmallTrain =
    " --csv-labels --set model.hidden_dim=32 --set model.output_dim=8"
    " --set trainer.T=10 --set affinity.tau=12 --set spectral.k=3";

}  // namespace

TEST_CASE("cli: synth writes a loadable deterministic file") {
    Scratch scratch;
    const std::string a = scratch / "a.csv";
    const std::string b = scratch / "b.csv";
    const std::string flags =
        " --dim 10 --subspace-dim 2 --k 2 --segments 8,8 --sigma 0 --seed 5";
    CHECK(run_cli("synth --out " + a + flags).code == 0);
    CHECK(run_cli("synth --out " + b + flags).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK_FALSE(slurp(a).empty());

    // Refuses to overwrite without --force, allows it with.
    CHECK(run_cli("synth --out " + a + flags).code == 2);
    CHECK(run_cli("synth --out " + a + flags + " --force").code == 0);

    // sigma 0 prints the subspace self-check.
    const RunResult r = run_cli("synth --out " + scratch / std::string("c.csv") + flags);
    CHECK(r.out.find("residual") != std::string::npos);
}

TEST_CASE("cli: train produces a complete run directory and final metrics") {
    Scratch scratch;
    const std::string features = make_features(scratch);
    const std::string run_dir = scratch / "run";
    const RunResult r =
        run_cli("train --input " + features + " --out " + run_dir + kSmallTrain);
    CHECK(r.code == 0);
    CHECK(r.out.find("acc") != std::string::npos);

    for (const char* name :
         {"config.txt", "log.txt", "labels.txt", "summary.txt", "affinity.csv",
          "checkpoint.bin"}) {
        CHECK(fs::exists(fs::path(run_dir) / name));
    }

    // Refuses a second run into the same directory without --force.
    CHECK(run_cli("train --input " + features + " --out " + run_dir + kSmallTrain).code ==
          2);
}

TEST_CASE("cli: identical train invocations are bitwise identical") {
    Scratch scratch;
    const std::string features = make_features(scratch);
    const std::string run1 = scratch / "run1";
    const std::string run2 = scratch / "run2";
    REQUIRE(run_cli("train --input " + features + " --out " + run1 + kSmallTrain).code == 0);
    REQUIRE(run_cli("train --input " + features + " --out " + run2 + kSmallTrain).code == 0);
    CHECK(slurp(fs::path(run1) / "labels.txt") == slurp(fs::path(run2) / "labels.txt"));
    CHECK(slurp(fs::path(run1) / "log.txt") == slurp(fs::path(run2) / "log.txt"));
    CHECK_FALSE(slurp(fs::path(run1) / "log.txt").empty());
}

TEST_CASE("cli: train maps error classes onto exit codes") {
    Scratch scratch;
    // Missing input file: data error, and the message names the path.
    const std::string absent = scratch / "absent.csv";
    const RunResult missing = run_cli("train --input " + absent + " --out " +
                                      scratch / std::string("r1") + kSmallTrain);
    CHECK(missing.code == 3);
    CHECK(missing.out.find("absent.csv") != std::string::npos);

    // Bad config value: config error.
    const std::string features = make_features(scratch);
    const RunResult bad_cfg =
        run_cli("train --input " + features + " --out " + scratch / std::string("r2") +
                kSmallTrain + " --set trainer.T=0");
    CHECK(bad_cfg.code == 2);

    const RunResult bad_key =
        run_cli("train --input " + features + " --out " + scratch / std::string("r3") +
                kSmallTrain + " --set trainer.bogus=1");
    CHECK(bad_key.code == 2);

    // One-step override still completes.
    const RunResult one_step =
        run_cli("train --input " + features + " --out " + scratch / std::string("r4") +
                kSmallTrain + " --set trainer.T=1");
    CHECK(one_step.code == 0);
}

TEST_CASE("cli: eval scores label files") {
    Scratch scratch;
    const std::string gt = scratch / "gt.txt";
    {
        std::ofstream out(gt);
        out << "0\n0\n1\n1\n";
    }
    const RunResult same = run_cli("eval --pred " + gt + " --gt " + gt);
    CHECK(same.code == 0);
    CHECK(same.out.find("acc=1") != std::string::npos);
    CHECK(same.out.find("nmi=1") != std::string::npos);

    // Renaming every label leaves the metrics at 1.
    const std::string renamed = scratch / "renamed.txt";
    {
        std::ofstream out(renamed);
        out << "1\n1\n0\n0\n";
    }
    const RunResult perm = run_cli("eval --pred " + renamed + " --gt " + gt);
    CHECK(perm.code == 0);
    CHECK(perm.out.find("acc=1") != std::string::npos);

    // The 4-frame half-match: acc 0.5, nmi 0.
    const std::string half = scratch / "half.txt";
    {
        std::ofstream out(half);
        out << "0\n1\n0\n1\n";
    }
    const RunResult crossed = run_cli("eval --pred " + half + " --gt " + gt);
    CHECK(crossed.code == 0);
    CHECK(crossed.out.find("acc=0.5") != std::string::npos);

    // Length mismatch is a data error.
    const std::string shorter = scratch / "short.txt";
    {
        std::ofstream out(shorter);
        out << "0\n1\n";
    }
    CHECK(run_cli("eval --pred " + shorter + " --gt " + gt).code == 3);
}

TEST_CASE("cli: segment clusters an exported affinity") {
    Scratch scratch;
    const std::string features = make_features(scratch);
    const std::string run_dir = scratch / "run";
    REQUIRE(run_cli("train --input " + features + " --out " + run_dir + kSmallTrain +
                    " --set trainer.T=30")
                .code == 0);

    const std::string labels_out = scratch / "seg_labels.txt";
    const RunResult r = run_cli("segment --affinity " + run_dir +
                                "/affinity.csv --k 3 --out " + labels_out);
    CHECK(r.code == 0);
    CHECK(fs::exists(labels_out));

    std::ifstream in(labels_out);
    int count = 0;
    std::string line;
    while (std::getline(in, line)) ++count;
    CHECK(count == 36);
}

TEST_CASE("cli: gradcheck exit codes track the verdict") {
    const RunResult ok = run_cli("gradcheck --seeds 3");
    CHECK(ok.code == 0);
    CHECK(ok.out.find("PASS") != std::string::npos);

    // A coarse stencil steps across rectifier kinks, so deviations blow up;
    // the exit code must still follow whatever tolerance was asked for.
    const RunResult coarse = run_cli("gradcheck --seeds 2 --h 1e-2 --tol 100");
    CHECK(coarse.code == 0);
    CHECK(coarse.out.find("deviation") != std::string::npos);
    const RunResult coarse_tight = run_cli("gradcheck --seeds 2 --h 1e-2 --tol 1e-5");
    CHECK(coarse_tight.code == 1);

    const RunResult flipped = run_cli("gradcheck --seeds 2 --inject-sign-flip");
    CHECK(flipped.code == 1);
    CHECK(flipped.out.find("FAIL") != std::string::npos);
}

TEST_CASE("cli: ablate writes the 7-row grid") {
    Scratch scratch;
    const std::string features = make_features(scratch);
    const std::string csv = scratch / "ablation.csv";
    const RunResult r = run_cli("ablate --input " + features + kSmallTrain +
                                " --seeds 1 --jobs 2 --out " + csv +
                                " --set trainer.T=6");
    CHECK(r.code == 0);

    std::ifstream in(csv);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 8);  // header + 7 rows
    CHECK(lines[0].find("drop_rho") != std::string::npos);
    CHECK(lines[1].substr(0, 6) == "0,0,0,");
}

TEST_CASE("cli: robustness writes one row per noise level") {
    Scratch scratch;
    const std::string features = make_features(scratch);
    const std::string csv = scratch / "robustness.csv";
    const RunResult r = run_cli("robustness --input " + features + kSmallTrain +
                                " --sigmas 0,0.05,0.1 --seeds 1 --out " + csv +
                                " --set trainer.T=6");
    CHECK(r.code == 0);

    std::ifstream in(csv);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);  // header + 3 sigmas
}

TEST_CASE("cli: report renders a summary from a finished run") {
    Scratch scratch;
    const std::string features = make_features(scratch);
    const std::string run_dir = scratch / "run";
    REQUIRE(run_cli("train --input " + features + " --out " + run_dir + kSmallTrain).code ==
            0);

    const RunResult r = run_cli("report --run " + run_dir);
    CHECK(r.code == 0);
    CHECK(fs::exists(fs::path(run_dir) / "report"));

    // Missing run directory is a data error.
    CHECK(run_cli("report --run " + scratch / std::string("nope")).code != 0);
}

TEST_CASE("cli: help enumerates the config keys") {
    const RunResult r = run_cli("train --help");
    CHECK(r.code == 0);
    CHECK(r.out.find("trainer.T") != std::string::npos);
    CHECK(r.out.find("affinity.kappa") != std::string::npos);
    CHECK(r.out.find("loss.lambda1") != std::string::npos);
    CHECK(r.out.find("spectral.k") != std::string::npos);
}
