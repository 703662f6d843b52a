#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include "corewave/corewave.hpp"
#include "corewave/fetch.hpp"
#include "corewave/synthetic.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace corewave;

namespace {

const fs::path kCli = COREWAVE_CLI_PATH;

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("corewave_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        ::unsetenv("COREWAVE_DATA_DIR");
    }
    void TearDown() override {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }

    int run(const std::string& args) const {
        const std::string cmd = "cd '" + dir_.string() + "' && '" + kCli.string() + "' " + args + " >cli.log 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string log() const {
        std::ifstream in(dir_ / "cli.log");
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    void write(const std::string& name, const std::string& body) const { std::ofstream(dir_ / name) << body; }

    void write_archive_config(const std::string& extra = "") const {
        synthetic::write_archive(dir_ / "archive", synthetic::make_archive());
        write("run.ini", "[data]\ndir = archive\n[evaluation]\nsample_start = 1967-01\nsample_end = 2002-01\n"
                         "[measures]\nma_37 = ma:37\nhaar-L2 = wavelet:haar-L2\n" +
                             extra);
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, MissingSubcommandIsUsageError) { EXPECT_EQ(run(""), 2); }

TEST_F(CliTest, UnknownConfigKeyExitsWithConfigCode) {
    write("bad.ini", "[evaluation]\nhorizon = 12\n");
    EXPECT_EQ(run("--config bad.ini evaluate"), 2);
    EXPECT_NE(log().find("horizon"), std::string::npos) << log();
}

TEST_F(CliTest, MissingPanelExitsWithDataCode) {
    write_archive_config("median_cpi = median\n");
    fs::remove(dir_ / "archive" / "panel.csv");
    EXPECT_EQ(run("--config run.ini evaluate"), 3);
    EXPECT_NE(log().find("median_cpi, ingestion"), std::string::npos) << log();
}

TEST_F(CliTest, EvaluateWritesTables) {
    write_archive_config();
    ASSERT_EQ(run("--config run.ini --out report evaluate"), 0) << log();
    EXPECT_TRUE(fs::exists(dir_ / "report" / "table1.tsv"));
    EXPECT_TRUE(fs::exists(dir_ / "report" / "table7_h24.tsv"));
    EXPECT_TRUE(fs::exists(dir_ / "report" / "metadata.tsv"));
}

TEST_F(CliTest, DecomposeAndMeasureAndSelect) {
    write_archive_config();
    ASSERT_EQ(run("--out dec decompose --input archive/cpi.csv --index --wavelet db2-L3"), 0) << log();
    EXPECT_TRUE(fs::exists(dir_ / "dec" / "decomposition.tsv"));
    ASSERT_EQ(run("--config run.ini --out m measure --measure haar-L2"), 0) << log();
    EXPECT_TRUE(fs::exists(dir_ / "m" / "haar-L2.csv"));
    EXPECT_FALSE(fs::exists(dir_ / "m" / "ma_37.csv"));
    EXPECT_EQ(run("--config run.ini --out m measure --measure nope"), 2);
    write("sel.ini", "[data]\ndir = archive\n[evaluation]\nsample_start = 1967-01\nsample_end = 2002-01\n"
                     "[selection]\nfamilies = haar, db:3\nmax_level = 5\n");
    ASSERT_EQ(run("--config sel.ini --out s select"), 0) << log();
    std::ifstream audit(dir_ / "s" / "selection_audit.tsv");
    int lines = 0;
    for (std::string l; std::getline(audit, l);) ++lines;
    // haar, db2 and db3 at five levels each; db1 duplicates haar.
    EXPECT_EQ(lines, 1 + 3 * 5);
}

TEST_F(CliTest, NumericalFailureExitsWithNumericalCode) {
    // A constant parent has no variance, so the summary ratios cannot be formed.
    synthetic::write_archive(dir_ / "archive", synthetic::make_archive());
    std::ostringstream flat;
    flat << "date,value\n";
    for (int m = 0; m < 505; ++m) flat << YearMonth{1960, 1}.plus(m).to_string() << ",100\n";
    write("archive/cpi.csv", flat.str());
    write("run.ini", "[data]\ndir = archive\n[measures]\nma_37 = ma:37\n");
    EXPECT_EQ(run("--config run.ini evaluate"), 4) << log();
}

TEST_F(CliTest, FetchFromLocalServer) {
    httplib::Server server;
    server.Get("/CPIAUCSL.csv", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("observation_date,CPIAUCSL\n1967-01-01,32.9\n1967-02-01,32.9\n1967-03-01,33.0\n", "text/csv");
    });
    server.Get("/broken.csv", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("observation_date,CPIAUCSL\n1967-01-01,32.9\n1967-03-01,33.0\n", "text/csv");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    const std::string base = "http://127.0.0.1:" + std::to_string(port);

    EXPECT_EQ(run("--out got fetch --url " + base + "/CPIAUCSL.csv"), 0) << log();
    const auto s = pipeline::load_series_csv(dir_ / "got" / "CPIAUCSL.csv");
    EXPECT_EQ(s.size(), 3u);
    EXPECT_EQ(s.start, (YearMonth{1967, 1}));

    EXPECT_EQ(run("--out got fetch --url " + base + "/broken.csv"), 3);
    EXPECT_FALSE(fs::exists(dir_ / "got" / "broken.csv"));
    EXPECT_FALSE(fs::exists(dir_ / "got" / "broken.csv.part"));
    EXPECT_EQ(run("--out got fetch --url " + base + "/absent.csv"), 3);
    EXPECT_EQ(run("--out got fetch --url ftp://example.org/x.csv"), 2);

    server.stop();
    worker.join();
}
