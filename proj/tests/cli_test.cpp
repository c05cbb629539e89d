#include <gtest/gtest.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <netinet/in.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "fixture.hpp"
#include "vlens/catalog.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("vlens-cli-" + std::to_string(rd()));
    fs::create_directories(dir_);
    catalog_ = (dir_ / "cat.xml").string();
  }
  void TearDown() override {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  // Runs the binary with stderr folded into stdout.
  Outcome run(const std::string& args, const std::string& env = "", const std::string& input = "") {
    std::string cmd = env + " " + quote(VLENS_CLI) + " " + args + " 2>&1";
    if (!input.empty()) {
      auto in = dir_ / "stdin.txt";
      std::ofstream(in) << input;
      cmd += " < " + quote(in.string());
    } else {
      cmd += " < /dev/null";
    }
    FILE* pipe = popen(cmd.c_str(), "r");
    EXPECT_NE(pipe, nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    while (auto n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
  }

  Outcome cli(const std::string& args, const std::string& input = "") {
    return run("--catalog " + quote(catalog_) + " " + args, "", input);
  }

  std::string fx(const std::string& rel) { return quote((fs::path(fixture::dir()) / rel).string()); }

  void populate() {
    ASSERT_EQ(cli("ingest " + fx("cyclone.xml")).code, 0);
    ASSERT_EQ(cli("viewpoint add " + fx("viewpoints/actorx-shape.xml")).code, 0);
    ASSERT_EQ(cli("viewpoint add " + fx("viewpoints/actorx-manufacturing.xml")).code, 0);
    ASSERT_EQ(cli("mapping add " + fx("mappings/actorx-shape-to-manufacturing.xml")).code, 0);
  }

  std::string write(const std::string& name, const std::string& content) {
    auto p = dir_ / name;
    std::ofstream(p) << content;
    return quote(p.string());
  }

  fs::path dir_;
  std::string catalog_;
};

}  // namespace

TEST_F(CliTest, BuildsCatalogMatchingTheLibrary) {
  populate();
  EXPECT_EQ(vlens::load_catalog(catalog_), fixture::catalog());
}

TEST_F(CliTest, IngestReportsCounts) {
  auto r = cli("ingest " + fx("cyclone.xml"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("31 items, 41 relationships"), std::string::npos) << r.out;
}

TEST_F(CliTest, CatalogFromEnvironment) {
  auto r = run("ingest " + fx("cyclone.xml"), "VLENS_CATALOG=" + quote(catalog_));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(catalog_));
}

TEST_F(CliTest, QueryRanksBarrel) {
  populate();
  auto r = cli("query --viewpoint actorx-shape cylindrical barrel");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("   1. ", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("barrel  Cylindrical Barrel"), std::string::npos) << r.out;
  auto none = cli("query --viewpoint actorx-shape xylophone");
  EXPECT_EQ(none.code, 0);
  EXPECT_NE(none.out.find("(no results)"), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("query cylindrical").code, 1);
  EXPECT_EQ(cli("mine --from a --to b --min-conf x").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(CliTest, DataErrorsExitTwo) {
  populate();
  EXPECT_EQ(cli("query --viewpoint ghost barrel").code, 2);
  EXPECT_EQ(cli("query --viewpoint actorx-shape -- '--'").code, 2);
  EXPECT_EQ(cli("ingest " + write("bad.xml", "<ppco><items>")).code, 2);
  EXPECT_EQ(cli("viewpoint add " + write("vp.xml", "<viewpoint id=\"v\" actor=\"nobody\"/>")).code, 2);
  EXPECT_EQ(cli("mapping add " + write("m.xml", "<mapping source_vp=\"actorx-shape\" target_vp=\"ghost\"/>")).code, 2);
  EXPECT_EQ(cli("mine --from actorx-shape --to actorx-manufacturing --min-conf 0").code, 2);
  // The failed commands left the catalog as it was.
  EXPECT_EQ(vlens::load_catalog(catalog_), fixture::catalog());
}

TEST_F(CliTest, IoErrorsExitThree) {
  EXPECT_EQ(cli("ingest " + quote((dir_ / "missing.xml").string())).code, 3);
  EXPECT_EQ(cli("query --viewpoint actorx-shape barrel").code, 3);  // no catalog yet
  EXPECT_EQ(run("--catalog " + quote((dir_ / "no" / "such" / "dir" / "c.xml").string()) + " ingest " +
                fx("cyclone.xml"))
                .code,
            3);
}

TEST_F(CliTest, MineAndSave) {
  populate();
  auto r = cli("mine --from actorx-shape --to actorx-manufacturing --min-conf 0.5 --save");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find(" rules"), std::string::npos);
  auto c = vlens::load_catalog(catalog_);
  EXPECT_EQ(c.mappings().size(), 2u);
}

TEST_F(CliTest, InteractiveSession) {
  populate();
  auto r = cli("session --actor actor-x --viewpoints actorx-shape,actorx-manufacturing",
               "cylindrical barrel\n:transition actorx-manufacturing barrel\n:go\n:transition ghost\n:history\n:quit\n");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("barrel  Cylindrical Barrel"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("strategy: IntersectionEntry"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("error: "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("3 query"), std::string::npos) << r.out;
  EXPECT_EQ(cli("session --actor nobody --viewpoints actorx-shape", ":quit\n").code, 2);
}

TEST_F(CliTest, ServeOnBusyPortExitsThree) {
  populate();
  int sock = socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(sock, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ASSERT_EQ(bind(sock, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  ASSERT_EQ(listen(sock, 1), 0);
  socklen_t len = sizeof addr;
  getsockname(sock, reinterpret_cast<sockaddr*>(&addr), &len);
  int port = ntohs(addr.sin_port);
  auto r = cli("serve --host 127.0.0.1 --port " + std::to_string(port));
  close(sock);
  EXPECT_EQ(r.code, 3) << r.out;
}
