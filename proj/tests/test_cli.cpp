#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hyperlat/sampling.hpp"

using namespace hyperlat;
namespace fs = std::filesystem;

namespace {

const std::string kCli = HYPERLAT_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run(const std::string& args) {
  const fs::path dir = fs::temp_directory_path() / "hyperlat_cli_test";
  fs::create_directories(dir);
  const fs::path out = dir / "out.txt";
  const std::string cmd = '"' + kCli + "\" " + args + " > " + out.string() + " 2> " +
                          (dir / "err.txt").string();
  const int rc = std::system(cmd.c_str());
  std::ifstream in(out);
  std::ostringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(rc), ss.str()};
}

}  // namespace

TEST_CASE("count prints the exact cardinality") {
  auto r = run("count --l 2 --r 2 --n 4");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "8\n");
}

TEST_CASE("u-cdf closed-form endpoint") {
  auto r = run("u-cdf --l 1 --r 2 --x 0.25");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "1\n");
}

TEST_CASE("usage errors exit 1") {
  CHECK(run("count --l 2").exit_code == 1);
  CHECK(run("nonsense").exit_code == 1);
  CHECK(run("").exit_code == 1);
}

TEST_CASE("computation errors exit 2") {
  CHECK(run("count --l 1 --r 6 --n 100000000").exit_code == 2);  // 128-bit overflow
  CHECK(run("count --l 2 --r 3 --n 100000 --budget 10").exit_code == 2);
  CHECK(run("u-cdf --l 1 --r 2 --x 0.3").exit_code == 2);  // above the support endpoint
}

TEST_CASE("sample dump round-trips and seed determines bytes") {
  const fs::path dir = fs::temp_directory_path() / "hyperlat_cli_sample";
  fs::create_directories(dir);
  const fs::path csv = dir / "pts.csv";
  auto r1 = run("sample --l 2 --r 3 --n 1000 --m 50 --seed 9 --dump " + csv.string());
  CHECK(r1.exit_code == 0);
  const auto points = sampling::read_csv(csv);
  REQUIRE(points.size() == 50);
  for (const auto& p : points) {
    REQUIRE(p.coords.size() == 3);
    // membership: e_2(i) <= n
    const u128 v = static_cast<u128>(p.coords[0]) * p.coords[1] +
                   static_cast<u128>(p.coords[0]) * p.coords[2] +
                   static_cast<u128>(p.coords[1]) * p.coords[2];
    CHECK(v <= 1000);
  }
  std::ifstream meta(csv.string() + ".meta.json");
  std::ostringstream meta_text;
  meta_text << meta.rdbuf();
  CHECK(meta_text.str().find("\"rng\": \"splitmix64\"") != std::string::npos);
  CHECK(meta_text.str().find("\"draws\": 50") != std::string::npos);

  auto a = run("sample --l 2 --r 2 --n 500 --m 40 --seed 123");
  auto b = run("sample --l 2 --r 2 --n 500 --m 40 --seed 123");
  auto c = run("sample --l 2 --r 2 --n 500 --m 40 --seed 124");
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  fs::remove_all(dir);
}

TEST_CASE("count-scaled variants") {
  CHECK(run("count-scaled --l 2 --r 2 --n 4 --t 2,1").out == "3\n");
  CHECK(run("count-scaled --l 2 --r 2 --n 4 --mu 2,1").out == "3\n");
  CHECK(run("count-scaled --l 2 --r 2 --n 4 --cap 2").out == "3\n");
  CHECK(run("count-scaled --l 2 --r 2 --n 4").exit_code == 1);
}

TEST_CASE("cache directory round-trips counts") {
  const fs::path dir = fs::temp_directory_path() / "hyperlat_cli_cache";
  fs::remove_all(dir);
  auto first = run("count --l 2 --r 3 --n 2000 --cache-dir " + dir.string());
  CHECK(first.exit_code == 0);
  std::ifstream cache_file(dir / "counts.tsv");
  std::string line;
  REQUIRE(std::getline(cache_file, line));
  CHECK(line.find("v1:count:2:3:2000\t") == 0);
  auto second = run("count --l 2 --r 3 --n 2000 --cache-dir " + dir.string());
  CHECK(second.out == first.out);
  fs::remove_all(dir);
}

TEST_CASE("gate subcommands emit reports with chosen format") {
  auto json = run("gcd-dist --gate --l 2 --r 2 --n 20000 --tol 0.2 --seed 5");
  CHECK(json.exit_code == 0);
  CHECK(json.out.find("\"experiment\": \"gcd-limit\"") != std::string::npos);
  auto csv = run("gcd-dist --gate --l 2 --r 2 --n 20000 --tol 0.2 --seed 5 --format csv");
  CHECK(csv.out.find("experiment,l,r,n,m") == 0);
  // failing gate exits 3
  auto fail = run("gcd-dist --gate --l 2 --r 2 --n 20000 --tol 0.0001 --seed 5");
  CHECK(fail.exit_code == 3);
}

TEST_CASE("remaining gate and estimate subcommands run") {
  auto lcm = run("lcm-moment --gate --l 2 --r 2 --n 50000 --m 0 --tol 0.2");
  CHECK(lcm.exit_code == 0);
  CHECK(lcm.out.find("\"experiment\": \"lcm-moment\"") != std::string::npos);
  auto spc = run("spacings --gate --r 2 --n 50000 --m 5000 --seed 3 --tol 0.2");
  CHECK(spc.exit_code == 0);
  auto hs = run("hypersum --l 2 --r 2 --n 2000 --f ind1 --mode gcd --sampled 5000 --seed 4");
  CHECK(hs.exit_code == 0);
  CHECK(hs.out.find("std_error") != std::string::npos);
  auto vol = run("volume --l 1 --r 3");
  CHECK(vol.exit_code == 0);
  CHECK(vol.out.find("0.1666") != std::string::npos);
}
