#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "latvar/io.hpp"

using namespace latvar;

namespace {

json parse(const char* text) { return json::parse(text); }

ConfigOverrides with(const std::function<void(ConfigOverrides&)>& set) {
  ConfigOverrides o;
  set(o);
  return o;
}

const char* kDisk = R"({"body": {"type": "ball", "radius": 1}, "r": 2.5, "t": 0.5, "grid": 64})";

}  // namespace

TEST_CASE("body schema round trip", "[io]") {
  for (const char* text : {R"({"type":"ball","radius":1.5})", R"({"type":"ball","radius":1,"dimension":3})",
                           R"({"type":"ellipsoid","semiaxes":[2,1]})", R"({"type":"box","halfsides":[1,0.5,2]})",
                           R"({"type":"perturbed_disk","base":1,"cosine_coeffs":[[3,0.05,0],[2,0.05,0.3]]})"}) {
    const auto body = body_from_json(parse(text));
    const auto again = body_from_json(body_to_json(body));
    CHECK(body_to_json(again) == body_to_json(body));
    CHECK(again.dim() == body.dim());
    CHECK(volume(again) == volume(body));
  }
  CHECK(body_from_json(parse(R"({"type":"ball","radius":2})")).dim() == 2);
}

TEST_CASE("body schema rejects bad input", "[io]") {
  for (const char* text :
       {R"({"type":"ball"})", R"({"type":"ball","radius":-1})", R"({"type":"ball","radius":"1"})",
        R"({"type":"ball","radius":1,"colour":2})", R"({"type":"cone","radius":1})", R"({"radius":1})",
        R"({"type":"ellipsoid","semiaxes":[1,2,3,4]})", R"({"type":"box","halfsides":[1,0]})",
        R"({"type":"perturbed_disk","base":1,"cosine_coeffs":[[3,0.1,0]]})",
        R"({"type":"perturbed_disk","base":1,"cosine_coeffs":[[3,0.05]]})", R"([1,2])"}) {
    INFO(text);
    CHECK_THROWS_AS(body_from_json(parse(text)), ValidationError);
  }
  CHECK_THROWS_AS(body_to_json(difference_body(ConvexBody::perturbed_disk(1.0, {{3, 0.05, 0.0}}))), UnsupportedKind);
}

TEST_CASE("config validation happens before computation", "[io]") {
  CHECK_THROWS_AS(load_config(Command::count, parse(R"({"r": 2, "t": 0.1})")), ValidationError);
  CHECK_THROWS_AS(load_config(Command::count, parse(R"({"body": {"type":"ball","radius":1}, "r": 2, "t": 5})")),
                  ValidationError);
  CHECK_THROWS_AS(load_config(Command::variance, parse(R"({"body": {"type":"ball","radius":1}, "r": 2, "t": 0.1,
                                                          "estimators": ["magic"]})")),
                  ValidationError);
  CHECK_THROWS_AS(load_config(Command::variance, parse(R"({"bogus": 1})")), ValidationError);
  CHECK_THROWS_AS(load_config(Command::decompose, parse(R"({"body": {"type":"box","halfsides":[1,1]}, "r": 3,
                                                           "t": 0.1})")),
                  ValidationError);
  CHECK_THROWS_AS(load_config(Command::sweep, parse(R"({"body": {"type":"ball","radius":1}})")), ValidationError);
  CHECK_THROWS_AS(load_config(Command::oracle, parse(R"({"n": 3, "t": 0.5})")), ValidationError);
  CHECK_THROWS_AS(load_config(Command::oracle, parse(R"({"n": 0, "t": 0.1})")), ValidationError);
  CHECK_THROWS_AS(load_config(Command::count, parse(kDisk), with([](ConfigOverrides& o) { o.format = "xml"; })),
                  ValidationError);
  CHECK_THROWS_AS(load_config(Command::count, parse(kDisk), with([](ConfigOverrides& o) { o.workers = 0; })),
                  ValidationError);
  CHECK_THROWS_AS(load_config(Command::count, parse(R"({"body": {"type":"ball","radius":1}, "r": 2, "t": 0.1,
                                                       "grid": -4})")),
                  ValidationError);
  CHECK_THROWS_AS(load_config(Command::count, parse(R"({"body": {"type":"ball","radius":1}, "r": "2", "t": 0.1})")),
                  ValidationError);
  CHECK_NOTHROW(load_config(Command::selftest, json(nullptr)));
  CHECK_THROWS_AS(command_from_string("plot"), ValidationError);
}

TEST_CASE("flags override the config file", "[io]") {
  const auto file = parse(R"({"body": {"type":"ball","radius":1}, "r": 8, "t": 0.05, "seed": 1, "cutoff": 10,
                             "samples": 100, "alpha": 0.4, "r_list": [4]})");
  ConfigOverrides flags;
  flags.seed = 7;
  flags.cutoff = 20.0;
  flags.samples = 300;
  flags.alpha = 0.6;
  flags.workers = 3;
  flags.format = "csv";
  flags.out = "x.csv";
  const auto c = load_config(Command::sweep, file, flags);
  CHECK(c.seed == 7);
  CHECK(*c.cutoff == 20.0);
  CHECK(c.samples == 300);
  CHECK(c.alpha == 0.6);
  CHECK(c.workers == 3);
  CHECK(c.format == "csv");
  CHECK(*c.out == "x.csv");

  const auto count = load_config(Command::count, parse(kDisk), with([](ConfigOverrides& o) { o.samples = 500; }));
  CHECK(count.scheme == "random");
}

TEST_CASE("config hash tracks content, not presentation", "[io]") {
  const auto base = load_config(Command::count, parse(kDisk));
  CHECK(config_hash(base).size() == 16);
  CHECK(config_hash(base) == config_hash(load_config(Command::count, parse(kDisk))));
  const auto presentation = with([](ConfigOverrides& o) {
    o.out = "a";
    o.format = "csv";
    o.workers = 4;
  });
  CHECK(config_hash(base) == config_hash(load_config(Command::count, parse(kDisk), presentation)));
  const auto finer = with([](ConfigOverrides& o) { o.grid = 65; });
  CHECK(config_hash(base) != config_hash(load_config(Command::count, parse(kDisk), finer)));
  // equivalent spellings of the same body resolve to the same config
  const auto spelled = load_config(
      Command::count, parse(R"({"body": {"type": "ball", "radius": 1.0, "dimension": 2}, "r": 2.5, "t": 0.5, "grid": 64})"));
  CHECK(config_hash(base) == config_hash(spelled));
  // the seed does not matter to a grid scheme
  const auto reseeded = with([](ConfigOverrides& o) { o.seed = 99; });
  CHECK(config_hash(base) == config_hash(load_config(Command::count, parse(kDisk), reseeded)));
  CHECK(config_hash(load_config(Command::oracle, parse(R"({"variant":"A","n":3,"t":0.125})"))) !=
        config_hash(load_config(Command::oracle, parse(R"({"variant":"B","n":3,"t":0.125})"))));
}

TEST_CASE("every output embeds version and hash", "[io]") {
  const auto c = load_config(Command::count, parse(kDisk));
  const auto rep = run_count(c);
  CHECK(rep.body["version"] == kVersion);
  CHECK(rep.body["config_hash"] == config_hash(c));
  CHECK(rep.body["config"] == resolved_config(c));
  CHECK(rep.csv.rfind(std::string("# latvar ") + kVersion + " config_hash=" + config_hash(c) + "\n", 0) == 0);
  for (Command cmd : {Command::oracle, Command::selftest}) {
    auto o = load_config(cmd, parse(R"({"n": 2, "t": 0.25})"));
    o.format = "json";
    const auto r = run_command(o);
    CHECK(json::parse(render(o, r))["config_hash"] == config_hash(o));
    o.format = "csv";
    CHECK(render(o, r).find(config_hash(o)) != std::string::npos);
  }
}

TEST_CASE("count output for the square annulus", "[io]") {
  const auto c = load_config(
      Command::count, parse(R"({"body": {"type":"box","halfsides":[1,1]}, "r": 3, "t": 0.125, "grid": 64})"));
  const auto rep = run_count(c);
  const auto& h = rep.body["histogram"];
  REQUIRE(h.size() == 3);
  const double total = 64.0 * 64.0;
  CHECK(h["24"].get<double>() / total == 0.125 * 0.125);
  CHECK(h["12"].get<double>() / total == 2 * 0.125 - 2 * 0.125 * 0.125);
  CHECK(rep.body["mean"] == 3.0);
  // header, config, column names, then one row per node
  std::size_t lines = 0;
  for (char ch : rep.csv) lines += ch == '\n';
  CHECK(lines == 3 + 64 * 64);
  CHECK(rep.csv.find("x_1,x_2,count\n") != std::string::npos);
  CHECK(rep.csv.find("\n0.0078125,0.0078125,") != std::string::npos);
}

TEST_CASE("count output at zero thickness", "[io]") {
  const auto c = load_config(Command::count, parse(R"({"body": {"type":"ball","radius":1}, "r": 2.5, "t": 0, "grid": 16})"));
  const auto rep = run_count(c);
  REQUIRE(rep.body["histogram"].size() == 1);
  CHECK(rep.body["histogram"]["0"] == 256);
  CHECK(rep.body["variance"] == 0.0);
}

TEST_CASE("count output for the disk matches the brute-force oracle", "[io]") {
  const auto c = load_config(Command::count, parse(kDisk));
  const auto rep = run_count(c);
  CHECK(rep.body["variance"].get<double>() ==
        Catch::Approx(brute_force_variance(Annulus(ConvexBody::ball(2, 1.0), 2.5, 0.5), 64)).epsilon(1e-12));
}

TEST_CASE("variance report for the square annulus", "[io]") {
  const auto c = load_config(Command::variance, parse(R"({"body": {"type":"box","halfsides":[1,1]}, "r": 3,
      "t": 0.125, "estimators": ["exact", "parseval", "grid"], "cutoff": 64, "grid": 256})"));
  const auto rep = run_variance(c);
  const auto& est = rep.body["estimators"];
  CHECK(est["exact"]["variance"] == 31.5);
  CHECK(est["exact"]["variance_exact"] == "63/2");
  CHECK(est["grid"]["variance"] == 31.5);
  const double pv = est["parseval"]["variance"].get<double>();
  CHECK(pv < 31.5);
  CHECK(31.5 - pv <= est["parseval"]["tail"]["bound"].get<double>());
  REQUIRE(rep.body["discrepancies"].size() == 3);
  CHECK(rep.body["discrepancies"][0]["pair"] == "exact-parseval");
  CHECK(rep.body["discrepancies"][0]["difference"].get<double>() == Catch::Approx(31.5 - pv));
  CHECK(rep.flags.empty());

  auto bad = c;
  bad.r = 2.5;
  CHECK_THROWS_AS(run_variance(bad), ValidationError);
}

TEST_CASE("variance report at zero thickness", "[io]") {
  const auto c = load_config(Command::variance, parse(R"({"body": {"type":"ball","radius":1}, "r": 4, "t": 0,
      "estimators": ["parseval", "sample", "grid"], "samples": 1000, "grid": 16})"));
  const auto rep = run_variance(c);
  for (const char* e : {"parseval", "sample", "grid"}) CHECK(rep.body["estimators"][e]["variance"] == 0.0);
  CHECK(rep.body["volume"] == 0.0);
}

TEST_CASE("coefficient dump", "[io]") {
  auto c = load_config(Command::variance, parse(R"({"body": {"type":"ball","radius":1}, "r": 3, "t": 0.2,
      "estimators": ["parseval"], "cutoff": 3, "coefficients_out": "coeffs.csv"})"));
  const auto rep = run_variance(c);
  REQUIRE(rep.extra_files.size() == 1);
  CHECK(rep.extra_files[0].first == "coeffs.csv");
  const auto& text = rep.extra_files[0].second;
  CHECK(text.find("n_1,n_2,re,im,method\n") != std::string::npos);
  std::size_t rows = 0;
  for (char ch : text) rows += ch == '\n';
  // 28 nonzero lattice points with |n| <= 3
  CHECK(rows == 3 + 28);
  CHECK(text.find(",closed_form\n") != std::string::npos);
}

TEST_CASE("sweep report carries warnings and beta", "[io]") {
  auto c = load_config(Command::sweep, parse(R"({"body": {"type":"ball","radius":1}, "alpha": 0.3,
      "r_list": [8, 16], "parseval_factor": 16, "sample": false})"));
  auto rep = run_sweep(c);
  REQUIRE(rep.body["warnings"].size() >= 1);
  CHECK(rep.body["warnings"][0].get<std::string>().find("alpha") != std::string::npos);
  CHECK(rep.body["rows"].size() == 2);
  CHECK(rep.csv.find("r,t,volume,var_sample,var_parseval,X,Y,Z,W,ratio,beta_fit\n") != std::string::npos);
  // sampling disabled leaves the column empty
  CHECK(rep.csv.find("\n8," + format_double(std::pow(8.0, -0.3)) + ",") != std::string::npos);
  CHECK(rep.csv.find(",,") != std::string::npos);
}

TEST_CASE("decompose report", "[io]") {
  const auto c = load_config(Command::decompose, parse(R"({"body": {"type":"ball","radius":1}, "r": 10, "t": 0.2})"));
  CHECK(c.decompose_cutoff() == 64.0);
  const auto rep = run_decompose(c);
  const double x = rep.body["X"].get<double>();
  const double y = rep.body["Y"].get<double>();
  const double z = rep.body["Z"].get<double>();
  CHECK(x + y + z == Catch::Approx(rep.body["variance"].get<double>()).epsilon(1e-14));
  CHECK(rep.body["W"].get<double>() == Catch::Approx(x - 2.0 * kPi * 10 * 0.2));
  CHECK(rep.body["reference"] == "parseval");
}

TEST_CASE("oracle report", "[io]") {
  const auto c = load_config(Command::oracle, parse(R"({"variant":"B","n":3,"t":0.125})"));
  const auto rep = run_oracle(c);
  CHECK(rep.body["mean"] == 3.0625);
  CHECK(rep.body["variance"] == 14.68359375);
  CHECK(rep.body["variance_exact"] == "3759/256");
  CHECK(rep.body["distribution"].size() == 3);
  CHECK(rep.csv.find("13,0.0625,1/16\n") != std::string::npos);
}

TEST_CASE("selftest checks pass", "[io]") {
  for (const auto& k : selftest_checks()) {
    INFO(k.name << " value " << k.value << " expected " << k.expected);
    CHECK(k.ok());
  }
}

TEST_CASE("number formatting round trips", "[io]") {
  for (double v : {0.1, 1.0 / 3.0, 31.443007540203393, 1e-300, -2.5e17}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_optional(std::nullopt).empty());
}

TEST_CASE("reports do not depend on the worker count", "[io]") {
  for (const char* text :
       {R"({"body": {"type":"ball","radius":1}, "r": 8, "t": 0.05, "estimators": ["parseval","sample"],
            "cutoff": 40, "samples": 20000})",
        R"({"body": {"type":"perturbed_disk","base":1,"cosine_coeffs":[[3,0.05,0]]}, "r": 5, "t": 0.2,
            "estimators": ["parseval","grid"], "cutoff": 20, "grid": 64})"}) {
    auto c = load_config(Command::variance, parse(text));
    c.workers = 1;
    const auto one = render(c, run_command(c));
    c.workers = 4;
    CHECK(render(c, run_command(c)) == one);
  }
}
