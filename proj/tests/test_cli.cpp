#include "fixtures.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

extern char** environ;

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("subshape_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string output;
};

Run run_cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "cli.log";
  const std::string cmd = std::string("\"") + SUBSHAPE_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

std::string iris_build(const fs::path& dir, const std::string& extra = "") {
  return "build --input \"" + fixture::iris_path() + "\" --label-column class --out \"" + (dir / "iris").string() + "\" " + extra;
}

int free_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("build with defaults") {
  const auto dir = scratch("defaults");
  const auto r = run_cli(iris_build(dir), dir);
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const auto report = json::parse(slurp(dir / "iris.report.json"));
  CHECK(report["points"] == 150);
  CHECK(report["clusters"] == 3);
  CHECK(report["cluster_sizes"] == json({50, 50, 50}));
  CHECK(report["meshes"].size() == 6);
  for (const auto& m : report["meshes"]) {
    CHECK(m["watertight"] == true);
    CHECK(m["degenerate_triangles"] == 0);
  }
  const std::string obj = slurp(dir / "iris.obj");
  std::size_t objects = 0;
  for (std::size_t p = obj.find("\no "); p != std::string::npos; p = obj.find("\no ", p + 1)) ++objects;
  CHECK(objects == 6);
  CHECK(fs::exists(dir / "iris.mtl"));
}

TEST_CASE("opacity reaches the material file") {
  const auto dir = scratch("opacity");
  const auto r = run_cli(iris_build(dir, "--opacity 0.7 --layers 1"), dir);
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const std::string mtl = slurp(dir / "iris.mtl");
  CHECK(mtl.find("d 0.7\n") != std::string::npos);
}

TEST_CASE("bad arguments fail with a message") {
  const auto dir = scratch("bad");
  auto r = run_cli(iris_build(dir, "--dims 0,0,1"), dir);
  CHECK(r.code != 0);
  CHECK(r.output.find("duplicate") != std::string::npos);
  r = run_cli(iris_build(dir, "--dims 0,1,9"), dir);
  CHECK(r.code != 0);
  CHECK(r.output.find("out of range") != std::string::npos);
  r = run_cli(iris_build(dir, "--format stl"), dir);
  CHECK(r.code != 0);
  r = run_cli("build --input /nonexistent.csv --out " + (dir / "x").string(), dir);
  CHECK(r.code != 0);
  CHECK(r.output.find("load_table") != std::string::npos);
}

TEST_CASE("exports are byte-identical across runs") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  for (const std::string fmt : {"obj", "gltf"}) {
    REQUIRE(run_cli(iris_build(a, "--format " + fmt + " --outliers true"), a).code == 0);
    REQUIRE(run_cli(iris_build(b, "--format " + fmt + " --outliers true"), b).code == 0);
  }
  for (const std::string f : {"iris.obj", "iris.mtl", "iris.gltf"}) {
    const std::string x = slurp(a / f);
    CHECK(!x.empty());
    CHECK(x == slurp(b / f));
  }
}

TEST_CASE("synth writes a loadable table") {
  const auto dir = scratch("synth");
  const auto csv = dir / "blobs.csv";
  REQUIRE(run_cli("synth --points 300 --dims 5 --clusters 3 --seed 4 --out \"" + csv.string() + "\"", dir).code == 0);
  const auto r = run_cli("build --input \"" + csv.string() + "\" --label-column cluster --out \"" + (dir / "b").string() +
                             "\" --format gltf --dump-fields \"" + (dir / "fields").string() + "\"",
                         dir);
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const auto report = json::parse(slurp(dir / "b.report.json"));
  CHECK(report["points"] == 300);
  CHECK(report["dimensions"] == 5);
  CHECK(report["clusters"] == 3);
  CHECK(fs::exists(dir / "fields" / "cluster2.field"));
}

TEST_CASE("serve answers over loopback") {
  const int port = free_port();
  const std::string port_text = std::to_string(port);
  const char* argv[] = {SUBSHAPE_CLI, "serve", "--port", port_text.c_str(), nullptr};
  pid_t pid = 0;
  REQUIRE(::posix_spawn(&pid, SUBSHAPE_CLI, nullptr, nullptr, const_cast<char* const*>(argv), environ) == 0);

  httplib::Client client("127.0.0.1", port);
  bool up = false;
  for (int i = 0; i < 100 && !up; ++i) {
    if (client.Get("/sessions/none/params")) {
      up = true;
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  }
  if (up) {
    auto created = client.Post("/sessions?label_column=class", slurp(fixture::iris_path()), "text/csv");
    REQUIRE(created);
    CHECK(created->status == 201);
    const std::string id = json::parse(created->body)["session_id"];
    auto proj = client.Get("/sessions/" + id + "/projection");
    REQUIRE(proj);
    CHECK(proj->status == 200);
    CHECK(json::parse(proj->body)["points"] == 150);
    auto rebuilt = client.Post("/sessions/" + id + "/rebuild", "", "application/json");
    REQUIRE(rebuilt);
    CHECK(rebuilt->status == 200);
    CHECK(json::parse(rebuilt->body)["meshes"].size() == 6);
    auto missing = client.Get("/sessions/nope/scene");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    auto del = client.Delete("/sessions/" + id);
    REQUIRE(del);
    CHECK(del->status == 200);
  }
  ::kill(pid, SIGTERM);
  int status = 0;
  ::waitpid(pid, &status, 0);
  CHECK(up);
}

}
