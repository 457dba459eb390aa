#include <gtest/gtest.h>

#include <cstdlib>
#include <numeric>
#include <sstream>

#include "cli.hpp"
#include "test_util.hpp"

namespace lann {
namespace {

using testing::data_path;
using testing::read_file;
using testing::scratch_dir;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "lann");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

TEST(Cli, HelpExitsZero) {
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"train", "--help"}).code, 0);
    EXPECT_NE(run({"--help"}).out.find("crossval"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"bogus"}).code, 2);
    EXPECT_EQ(run({"train", "--data", data_path("iris.csv")}).code, 2);
    EXPECT_EQ(run({"crossval", "--data", data_path("iris.csv"), "--algo", "svm"}).code, 2);
    EXPECT_EQ(run({"crossval", "--data", data_path("iris.csv"), "--k", "-3"}).code, 2);
    EXPECT_EQ(run({"generate", "spiral", "-o", "/tmp/x.csv"}).code, 2);
}

TEST(Cli, MissingInputExitsOneAndNamesPath) {
    const auto r = run({"crossval", "--data", "/no/such/file.csv"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("/no/such/file.csv"), std::string::npos);
    const auto m = run({"fingerprints", "--model", "/no/such/model.lann", "--out", "/tmp/fp.csv"});
    EXPECT_EQ(m.code, 1);
    EXPECT_NE(m.err.find("/no/such/model.lann"), std::string::npos);
}

TEST(Cli, CrossvalUntrainedLannMatchesKnn) {
    const auto dir = scratch_dir("cli_cv");
    const auto a = run({"crossval", "--data", data_path("iris.csv"), "--algo", "lann", "--epochs", "0", "--out",
                        (dir / "lann.csv").string()});
    const auto b = run({"crossval", "--data", data_path("iris.csv"), "--algo", "knn", "--out",
                        (dir / "knn.csv").string()});
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(a.out.substr(a.out.find(':')), b.out.substr(b.out.find(':')));
    const auto la = read_file(dir / "lann.csv"), lb = read_file(dir / "knn.csv");
    ASSERT_NE(la.find("iris,lann,42,"), std::string::npos);
    ASSERT_NE(lb.find("iris,knn,42,"), std::string::npos);
    EXPECT_EQ(la.substr(la.find(",42,")), lb.substr(lb.find(",42,")));
}

TEST(Cli, TrainPredictExplainPipeline) {
    const auto dir = scratch_dir("cli_pipeline");
    const auto model = (dir / "iris.lann").string();
    const auto t = run({"train", "--data", data_path("iris.csv"), "--out", model, "--epochs", "5", "--losses",
                        (dir / "losses.csv").string()});
    ASSERT_EQ(t.code, 0) << t.err;
    EXPECT_EQ(read_file(dir / "losses.csv").substr(0, 16), "epoch,mean_loss\n");

    const auto p = run({"predict", "--model", model, "--query", "5.1,3.5,1.4,0.2", "--query", "6.7,3.0,5.2,2.3"});
    ASSERT_EQ(p.code, 0) << p.err;
    EXPECT_NE(p.out.find("0,setosa,"), std::string::npos);
    EXPECT_NE(p.out.find("1,virginica,"), std::string::npos);

    const auto pd = run({"predict", "--model", model, "--data", data_path("iris.csv"), "--out",
                         (dir / "pred.csv").string()});
    ASSERT_EQ(pd.code, 0) << pd.err;
    EXPECT_NE(pd.out.find("accuracy "), std::string::npos);

    const auto e = run({"explain", "--model", model, "--query", "5.1,3.5,1.4,0.2", "--out",
                        (dir / "explain.csv").string()});
    ASSERT_EQ(e.code, 0) << e.err;
    std::istringstream in(read_file(dir / "explain.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "feature,relevance");
    double total = 0;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        total += std::stod(line.substr(line.find(',') + 1));
        ++rows;
    }
    EXPECT_EQ(rows, 4u);
    EXPECT_NEAR(total, 1.0, 1e-9);

    EXPECT_EQ(run({"explain", "--model", model, "--query", "1,2"}).code, 1);
    const auto bad = run({"predict", "--model", model, "--query", "1,x,3,4"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("'x'"), std::string::npos);
}

TEST(Cli, FingerprintsAndDistanceExport) {
    const auto dir = scratch_dir("cli_fp");
    const auto model = (dir / "m.lann").string();
    ASSERT_EQ(run({"train", "--data", data_path("iris.csv"), "--out", model, "--epochs", "2"}).code, 0);
    ASSERT_EQ(run({"fingerprints", "--model", model, "--out", (dir / "fp.csv").string()}).code, 0);
    EXPECT_EQ(read_file(dir / "fp.csv").substr(0, 24), "class,feature,relevance\n");

    const auto r = run({"export-dist", "--model", model, "--out", (dir / "d.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "wrote 150x150 matrix\n");
    const auto labels = read_file(dir / "d.csv.labels");
    EXPECT_EQ(std::count(labels.begin(), labels.end(), '\n'), 150);
    const auto matrix = read_file(dir / "d.csv");
    EXPECT_EQ(std::count(matrix.begin(), matrix.end(), '\n'), 150);
    EXPECT_EQ(run({"export-dist", "--model", model, "--out", (dir / "d.csv").string(), "--symmetrize", "max"}).code,
              2);
}

TEST(Cli, GenerateIsDeterministic) {
    const auto dir = scratch_dir("cli_gen");
    for (const char* kind : {"licorice", "classification"}) {
        ASSERT_EQ(run({"generate", kind, "--seed", "7", "-o", (dir / "a.csv").string()}).code, 0);
        ASSERT_EQ(run({"generate", kind, "--seed", "7", "-o", (dir / "b.csv").string()}).code, 0);
        ASSERT_EQ(run({"generate", kind, "--seed", "8", "-o", (dir / "c.csv").string()}).code, 0);
        EXPECT_EQ(read_file(dir / "a.csv"), read_file(dir / "b.csv")) << kind;
        EXPECT_NE(read_file(dir / "a.csv"), read_file(dir / "c.csv")) << kind;
    }
    const auto d = load_csv((dir / "a.csv").string());
    EXPECT_EQ(d.size(), 2000u);
}

TEST(Cli, TrainingOutputsAreReproducible) {
    const auto dir = scratch_dir("cli_repro");
    for (const char* name : {"a", "b"}) {
        const auto base = dir / name;
        ASSERT_EQ(run({"train", "--data", data_path("wine.csv"), "--out", base.string() + ".lann", "--epochs", "3",
                       "--seed", "11", "--losses", base.string() + ".loss"})
                      .code,
                  0);
    }
    EXPECT_EQ(read_file(dir / "a.lann"), read_file(dir / "b.lann"));
    EXPECT_EQ(read_file(dir / "a.loss"), read_file(dir / "b.loss"));
}

TEST(Cli, Gradcheck) {
    const auto r = run({"gradcheck", "--trials", "100", "--tol", "1e-4"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
    const auto bad = run({"gradcheck", "--trials", "5", "--tol", "1e-30", "--step", "1e-2"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

#ifdef LANN_CLI_PATH
TEST(CliBinary, ExitCodes) {
    const std::string exe = LANN_CLI_PATH;
    auto status = [](const std::string& cmd) {
        const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    EXPECT_EQ(status(exe + " --help"), 0);
    EXPECT_EQ(status(exe + " nonsense"), 2);
    EXPECT_EQ(status(exe + " crossval --data /no/such.csv"), 1);
    const auto dir = scratch_dir("cli_binary");
    const auto out = (dir / "l.csv").string();
    EXPECT_EQ(status(exe + " generate licorice --seed 7 -o " + out), 0);
    const auto first = read_file(out);
    EXPECT_EQ(status(exe + " generate licorice --seed 7 -o " + out), 0);
    EXPECT_EQ(first, read_file(out));
    EXPECT_FALSE(first.empty());
}
#endif

}  // namespace
}  // namespace lann
