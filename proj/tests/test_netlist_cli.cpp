#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "fluxmod/analysis.hpp"
#include "fluxmod/netlist.hpp"
#include "helpers.hpp"

using namespace fluxmod;
using namespace fluxtest;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

// stdout only; stderr is discarded
RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(FLUXMOD_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::array<char, 4096> buf;
  for (std::size_t n; (n = fread(buf.data(), 1, buf.size(), p)) > 0;) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string netlist_path(const char* name) { return std::string(FLUXMOD_NETLIST_DIR) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("fluxmod_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

template <class F>
NetlistError netlist_error(F&& f) {
  try {
    f();
  } catch (const NetlistError& e) {
    return e;
  }
  FAIL("expected a netlist error");
  return NetlistError(ErrorKind::InvalidArgument, 0, "");
}

Netlist random_netlist(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Netlist n;
  const int nodes = 2 + int(u(rng) * 4);
  for (int i = 0; i < nodes; ++i) n.nodes.push_back("n" + std::to_string(i));
  auto pick = [&] { return n.nodes[std::size_t(u(rng) * nodes) % nodes]; };
  for (int i = 0; i < 6; ++i) {
    NetElement e;
    e.name = "e" + std::to_string(i);
    e.a = pick();
    switch (i % 4) {
      case 0: e.kind = NetElement::Kind::Cap, e.value = u(rng) * 1e-12; break;
      case 1: e.kind = NetElement::Kind::Res, e.value = 1 + u(rng) * 1e3, e.b = pick(); break;
      case 2:
        e.kind = NetElement::Kind::Squid, e.dc = 0.4 * u(rng), e.stack = 1 + int(u(rng) * 12), e.ic = u(rng) * 1e-5;
        for (int p = 0; p < int(u(rng) * 3); ++p) e.pumps.push_back({0.02 * u(rng), 1 + p, 360 * u(rng)});
        break;
      case 3:
        e.kind = NetElement::Kind::JInv, e.value = u(rng) * 0.02, e.b = pick(), e.sign = u(rng) < 0.5 ? 1 : -1;
        break;
    }
    if (e.b == e.a) e.b.clear();
    if (e.kind == NetElement::Kind::JInv && e.b.empty()) e.b = e.a == n.nodes[0] ? n.nodes[1] : n.nodes[0];
    n.elements.push_back(e);
  }
  n.ports.push_back({1, n.nodes[0], 25 + 50 * u(rng)});
  if (u(rng) < 0.7) n.grid = NetGrid{u(rng) * 1e10, u(rng) * 1e9, int(u(rng) * 10)};
  return n;
}

}  // namespace

TEST_SUITE("netlist") {
  TEST_CASE("SI numbers") {
    CHECK(parse_si("257f") == doctest::Approx(257e-15));
    CHECK(parse_si("4u") == doctest::Approx(4e-6));
    CHECK(parse_si("500M") == doctest::Approx(500e6));
    CHECK(parse_si("6G") == 6e9);
    CHECK(parse_si("25m") == doctest::Approx(0.025));
    CHECK(parse_si("1.5e3") == 1500.0);
    CHECK(parse_si("-2k") == -2000.0);
    for (const char* bad : {"", "f", "1x", "1.2.3", "5ff", "abc"}) {
      CAPTURE(bad);
      CHECK_THROWS_AS(parse_si(bad), Error);
    }
    for (double v : {257e-15, 0.1, 1.0 / 3.0, 6.9e9, -1e-300}) CHECK(parse_si(format_exact(v)) == v);
  }

  TEST_CASE("minimal shunt RC") {
    const Netlist n = parse_netlist("node A\nres r1 A 0 50 # load\n\nCap c1 A gnd 257f\nPORT 1 A\n");
    REQUIRE(n.nodes == std::vector<std::string>{"A"});
    REQUIRE(n.elements.size() == 2);
    CHECK(n.elements[0].kind == NetElement::Kind::Res);
    CHECK(n.elements[0].b.empty());
    CHECK(n.elements[1].value == doctest::Approx(257e-15));
    CHECK(n.ports[0].z0 == 50.0);
    const Device d = to_device(n);
    const auto g = build_grid(6e9, 1e9, 0);
    const auto s = solve_floquet_s(d.graph, g);
    const cdouble z = 1.0 / (1.0 / 50.0 + cdouble(0, kTwoPi * 6e9 * 257e-15));
    CHECK(std::abs(s(0, 0, 0, 0) - (z - 50.0) / (z + 50.0)) < 1e-12);
  }

  TEST_CASE("errors carry the line number") {
    auto e = netlist_error([] { parse_netlist("NODE a\nCAP c a 1p\n\nPUMP s1 amp=0.01\n"); });
    CHECK(e.kind() == ErrorKind::UnresolvedNodeRef);
    CHECK(e.line() == 4);
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);

    e = netlist_error([] { parse_netlist("NODE a\nWIRE w a 0\n"); });
    CHECK(e.kind() == ErrorKind::UnknownDirective);
    CHECK(e.line() == 2);

    e = netlist_error([] { parse_netlist("NODE a\nCAP c a 1p\nCAP c a 2p\n"); });
    CHECK(e.kind() == ErrorKind::DuplicateName);
    CHECK(e.line() == 3);

    e = netlist_error([] { parse_netlist("NODE a\nCAP c a 1.2.3p\n"); });
    CHECK(e.kind() == ErrorKind::MalformedNumber);
    CHECK(e.line() == 2);

    e = netlist_error([] { parse_netlist("NODE a\nCAP c b 1p\n"); });
    CHECK(e.kind() == ErrorKind::UnresolvedNodeRef);

    e = netlist_error([] { parse_netlist("NODE a\nTEMPLATE isolator3\n"); });
    CHECK(e.kind() == ErrorKind::InvalidArgument);

    e = netlist_error([] { parse_netlist("TEMPLATE isolator3 ampp=1\n"); });
    CHECK(e.kind() == ErrorKind::InvalidArgument);
    CHECK(e.line() == 1);
  }

  TEST_CASE("device construction checks") {
    CHECK_THROWS_AS(to_device(parse_netlist("NODE a\nCAP c a 1p\nSQUID s a dc=0.1\nPUMP s amp=0.01\nPORT 1 a\n")), Error);
    CHECK_THROWS_AS(to_device(parse_netlist("NODE a\nNODE b\nCAP c a 1p\nCAP d b 1p\nPORT 1 a\nPORT 3 b\n")), Error);
    CHECK_THROWS_AS(to_device(parse_netlist("TEMPLATE isolator3\nGRID fbase=1G\n")), Error);
    const Device d = to_device(parse_netlist("TEMPLATE isolator3 amp=30m\nGRID k=5\n"));
    CHECK(d.k_default == 5);
    CHECK(d.series->stages[1].squid->pumps[0].amplitude == 0.03);
  }

  TEST_CASE("emit then parse is the identity") {
    for (const char* f : {"rc_shunt.net", "isolator3.net", "two_resonator.net"}) {
      std::ifstream in(netlist_path(f));
      std::stringstream ss;
      ss << in.rdbuf();
      const Netlist n = parse_netlist(ss.str());
      CHECK(parse_netlist(emit_netlist(n)) == n);
      CHECK(emit_netlist(parse_netlist(emit_netlist(n))) == emit_netlist(n));
    }
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
      const Netlist n = random_netlist(rng);
      CHECK(parse_netlist(emit_netlist(n)) == n);
    }
  }

  TEST_CASE("template netlist matches the template") {
    const Device a = to_device(parse_netlist("TEMPLATE isolator3\n"));
    const Device b = make_template("isolator3", {});
    const auto g = build_grid(6e9, b.f_base, 3);
    CHECK(max_abs_diff(device_s(a, g, CoefficientMode::Exact).matrix(),
                       device_s(b, g, CoefficientMode::Exact).matrix()) == 0.0);
  }
}

TEST_SUITE("spectrum") {
  TEST_CASE("static spectra conserve power") {
    for (const char* name : {"isolator3", "wye1"}) {
      CAPTURE(name);
      const Device d = make_template(name, {{"amp", 0.0}});
      for (const auto& line : output_spectrum(d, 6.05e9, 4, CoefficientMode::Exact, {0})) {
        double total = 0;
        for (double p : line.power) total += p;
        CHECK((line.k == 0 ? total : total + 1.0) == doctest::Approx(1.0).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("modulated spectra conserve total power across harmonics") {
    for (const char* name : {"isolator2", "isolator3", "wye1", "wye2"}) {
      CAPTURE(name);
      const Device d = make_template(name, {});
      const int k = 8;
      const auto lines = output_spectrum(d, d.f_center, k, CoefficientMode::Exact, {0});
      double total = 0;
      for (const auto& line : lines)
        for (double p : line.power) total += p;
      // total carried power shifts with frequency conversion; the photon-number sum is conserved
      double photons = 0;
      for (const auto& line : lines)
        for (double p : line.power) photons += p * d.f_center / line.frequency;
      CHECK(photons == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(total == doctest::Approx(1.0).epsilon(0.2));
    }
  }

  TEST_CASE("isolator suppresses the reverse carrier") {
    const Device d = make_template("isolator3", {});
    const auto lines = output_spectrum(d, d.f_center, 8, CoefficientMode::Exact, {1});
    for (const auto& l : lines)
      if (l.k == 0) CHECK(10 * std::log10(l.power[0]) <= -20.0);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("templates listing") {
    const auto r = run_cli("templates");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("template,parameter,default\n", 0) == 0);
    CHECK(r.out.find("isolator3,amp,0.025\n") != std::string::npos);
    const auto j = run_cli("templates --format json");
    CHECK(j.code == 0);
    CHECK(nlohmann::json::parse(j.out).is_array());
  }

  TEST_CASE("exit codes") {
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("bogus").code == 1);
    CHECK(run_cli("analyze").code == 1);
    CHECK(run_cli("analyze /nonexistent/file.net").code == 1);
    CHECK(run_cli("analyze isolator3 --mode quadratic").code == 1);
    CHECK(run_cli("analyze isolator3 --set nope=1").code == 1);
    const std::string bad = write_temp("bad.net", "NODE a\nCAP c a 1p\nPUMP s amp=1\n");
    CHECK(run_cli("analyze " + bad).code == 1);
    CHECK(run_cli("optimize isolator3 --bound amp=0.2:0.3 --k 2").code == 2);
    CHECK(run_cli("analyze isolator3 --mode taylor3 --points 3 --k 2").code == 0);
  }

  TEST_CASE("analysis output is reproducible") {
    const std::string args = "analyze " + netlist_path("two_resonator.net") + " --points 7";
    const auto a = run_cli(args), b = run_cli(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 8);
    const auto s1 = run_cli("sweep isolator3 --axis theta=-90:90:5 --k 4 --no-k-gate --jobs 1");
    const auto s2 = run_cli("sweep isolator3 --axis theta=-90:90:5 --k 4 --no-k-gate --jobs 2");
    CHECK(s1.code == 0);
    CHECK(s1.out == s2.out);
  }

  TEST_CASE("json mirrors csv") {
    const auto c = run_cli("sweep isolator3 --axis amp=0.01:0.03:3 --k 4 --no-k-gate");
    const auto j = run_cli("sweep isolator3 --axis amp=0.01:0.03:3 --k 4 --no-k-gate --format json");
    REQUIRE(c.code == 0);
    REQUIRE(j.code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    std::istringstream in(c.out);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "amp,IL_fwd,ISO_rev");
    int row = 0;
    while (std::getline(in, line)) {
      const auto& r = doc["rows"][row++];
      std::istringstream ls(line);
      std::string amp, il, iso;
      std::getline(ls, amp, ',');
      std::getline(ls, il, ',');
      std::getline(ls, iso, ',');
      CHECK(std::stod(amp) == doctest::Approx(r["amp"].get<double>()));
      CHECK(il == format_number(r["IL_fwd"].get<double>(), 4));
      CHECK(iso == format_number(r["ISO_rev"].get<double>(), 4));
    }
    CHECK(row == 3);
  }

  TEST_CASE("output file") {
    const auto path = (std::filesystem::temp_directory_path() / "fluxmod_test_out.csv").string();
    std::filesystem::remove(path);
    CHECK(run_cli("spectrum isolator3 --k 3 --out " + path).code == 0);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "in_port,k,f_Hz,P1_dB,P2_dB");
  }

  TEST_CASE("oracle subcommand") {
    const auto r = run_cli("oracle isolator3 --k 4");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("in_port,out_port,k,compared,spectral_dB,oracle_dB,error_dB\n", 0) == 0);
  }
}
