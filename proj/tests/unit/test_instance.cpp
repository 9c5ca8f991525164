#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "carleson/dsl/commands.hpp"
#include "fixtures.hpp"

using namespace carleson;
using namespace carleson::dsl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<fs::path> corpus(const char* sub = "") {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(fs::path(CARLESON_FIXTURE_DIR) / sub))
    if (entry.path().extension() == ".inst") out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("minimal instance") {
  const auto file = parse_instance("[sequence]\ngamma = 2^n\n[weights]\nv = 1\n[measure]\natom z=3i w=1");
  CHECK_FALSE(file.gamma.is_list);
  REQUIRE(file.measure.size() == 1);
  CHECK(file.measure[0].kind == ComponentDecl::Kind::atom);
  const auto inst = build(file);
  CHECK(inst.space.size() == default_truncation);
  CHECK(inst.space.gamma()[5] == std::complex<double>(64.0));
  CHECK(inst.measure.total_mass() == 1.0);
}

TEST_CASE("missing sequence section") {
  try {
    parse_instance("[measure]");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("missing [sequence]") != std::string::npos);
  }
}

TEST_CASE("atom family production") {
  const auto file =
      parse_instance("[sequence]\ngamma = 2^n\n[weights]\nv = 1\n[measure]\natoms n=2..40 z=2^n+1 w=4^(-n)\n");
  REQUIRE(file.measure.size() == 1);
  const auto& decl = file.measure[0];
  CHECK(decl.kind == ComponentDecl::Kind::atoms);
  CHECK(decl.n_lo == 2);
  CHECK(decl.n_hi == 40);
  CHECK(decl.pos.line == 6);
  const auto inst = build(file, Overrides{40, {}, {}, {}});
  const auto atoms = inst.measure.atoms();
  REQUIRE(atoms.size() == 39);
  CHECK(atoms.front().z == std::complex<double>(5.0));
  CHECK(atoms.back().w == std::ldexp(1.0, -80));

  const auto reference = testing::shifted_atoms(2, 40, testing::quarter_power);
  const auto a = quantity_sequences(inst.space, inst.measure);
  const auto b = quantity_sequences(testing::s1_space(40), reference);
  CHECK(a.A == b.A);
  CHECK(a.D == b.D);
}

TEST_CASE("values may contain spaces") {
  const auto file = parse_instance(
      "[sequence]\ngamma = 2 ^ n\n[weights]\nv = 1\n[measure]\natom z = 1 + 3i   w = 2 * 0.5\nradial a=1 b = 1.5 "
      "alpha=0 c=1\n");
  const auto inst = build(file, Overrides{8, {}, {}, {}});
  const auto atom = std::get<Atom<double>>(inst.measure.components()[0]);
  CHECK(atom.z == std::complex<double>(1.0, 3.0));
  CHECK(atom.w == 1.0);
}

TEST_CASE("lists and truncation") {
  const auto file = parse_instance("[sequence]\ngamma = [2, 5, 11, 3*n^2+20]\n[weights]\nv = [1, 2, 3, 4, 5]\n");
  CHECK(file.gamma.is_list);
  CHECK(file.gamma.items.size() == 4);
  const auto inst = build(file);
  CHECK(inst.space.size() == 4);
  CHECK(inst.space.gamma()[3] == std::complex<double>(68.0));
  CHECK(build(file, Overrides{3, {}, {}, {}}).space.size() == 3);
  CHECK_THROWS_AS(build(file, Overrides{5, {}, {}, {}}), InvalidInstance);
}

TEST_CASE("options and overrides") {
  const auto file = parse_instance(
      "[sequence]\ngamma = 2^n\n[weights]\nv = 1\n[options]\ntruncate = 12\ntol = 1e-8\nwindow = 2\ndiscretize = "
      "16\ntail_monotone = true\n");
  auto s = resolve_settings(file);
  CHECK(s.size == 12);
  CHECK(s.tol == 1e-8);
  CHECK(s.window == 2);
  CHECK(s.discretize == 16);
  CHECK(s.tail_monotone);
  s = resolve_settings(file, Overrides{20, 1e-6, 5, 32});
  CHECK(s.size == 20);
  CHECK(s.tol == 1e-6);
  CHECK(s.window == 5);
  CHECK(s.discretize == 32);
}

TEST_CASE("round trip on the fixture corpus") {
  const auto files = corpus();
  REQUIRE(files.size() >= 8);
  for (const auto& path : files) {
    CAPTURE(path.filename().string());
    const auto first = parse_instance(slurp(path));
    const auto printed = print(first);
    const auto second = parse_instance(printed);
    CHECK(structurally_equal(first, second));
    CHECK(print(second) == printed);
  }
}

TEST_CASE("structural equality notices changes") {
  const auto base = parse_instance(slurp(fs::path(CARLESON_FIXTURE_DIR) / "mixed.inst"));
  auto changed = base;
  changed.options.window = 4;
  CHECK_FALSE(structurally_equal(base, changed));
  changed = base;
  changed.measure[1].n_hi += 1;
  CHECK_FALSE(structurally_equal(base, changed));
  changed = base;
  changed.measure[2].fields[0].value = Expr::literal(7.5);
  CHECK_FALSE(structurally_equal(base, changed));
  changed = base;
  changed.measure.pop_back();
  CHECK_FALSE(structurally_equal(base, changed));
}

TEST_CASE("error corpus: class and location") {
  struct Expected {
    const char* file;
    bool parse;  // ParseError, otherwise an instance/evaluation error at build time
    int line;
    int column;
  };
  const Expected table[] = {
      {"missing_sequence.inst", true, 3, 1},   {"missing_weights.inst", true, 4, 1},
      {"duplicate_section.inst", true, 5, 1},  {"duplicate_key.inst", true, 5, 1},
      {"unknown_key.inst", true, 3, 1},        {"malformed_number.inst", true, 4, 5},
      {"malformed_exponent.inst", true, 4, 5}, {"unknown_section.inst", true, 5, 1},
      {"unknown_component.inst", true, 6, 1},  {"unknown_field.inst", true, 6, 15},
      {"missing_field.inst", true, 6, 1},      {"bad_option.inst", true, 6, 12},
      {"unbalanced.inst", true, 2, 17},        {"unknown_identifier.inst", true, 2, 11},
      {"nonmonotone.inst", false, 2, 9},       {"division_by_zero.inst", false, 4, 6},
      {"zero_negative_power.inst", false, 4, 6}, {"nonpositive_weight.inst", false, 4, 5},
      {"atom_on_gamma.inst", false, 6, 1},     {"short_list.inst", false, 2, 9},
      {"complex_weight.inst", false, 4, 5},
  };
  CHECK(corpus("errors").size() == std::size(table));
  for (const auto& e : table) {
    CAPTURE(e.file);
    const auto text = slurp(fs::path(CARLESON_FIXTURE_DIR) / "errors" / e.file);
    const std::string where = std::to_string(e.line) + ":" + std::to_string(e.column) + ":";
    if (e.parse) {
      try {
        parse_instance(text);
        FAIL("expected a parse error");
      } catch (const ParseError& err) {
        CHECK(err.pos().line == e.line);
        CHECK(err.pos().column == e.column);
      }
    } else {
      const auto file = parse_instance(text);
      try {
        build(file);
        FAIL("expected an invalid instance");
      } catch (const InvalidInstance& err) {
        CHECK(std::string(err.what()).rfind(where, 0) == 0);
      }
    }
  }
}

TEST_CASE("sweep specifications") {
  auto spec = parse_sweep("m2.w=0.5:0.25:1.5");
  CHECK(spec.param == "m2.w");
  REQUIRE(spec.values.size() == 5);
  CHECK(spec.values.back() == 1.5);
  spec = parse_sweep("truncate=40:-10:10");
  CHECK(spec.values == std::vector<double>{40, 30, 20, 10});
  CHECK_THROWS_AS(parse_sweep("tol"), ParseError);
  CHECK_THROWS_AS(parse_sweep("tol=1:0:2"), ParseError);
  CHECK_THROWS_AS(parse_sweep("tol=1:1:0"), ParseError);
  CHECK_THROWS_AS(parse_sweep("tol=1:x:2"), ParseError);

  const auto file = parse_instance(slurp(fs::path(CARLESON_FIXTURE_DIR) / "mixed.inst"));
  Overrides o;
  auto swept = apply_sweep(file, o, "m3.w", 2.0);
  CHECK(print(*swept.measure[2].find("w")->value) == "2");
  CHECK(structurally_equal(*file.measure[2].find("w")->value, *parse_expression("abs(3*i-4)^2/25")));
  swept = apply_sweep(file, o, "window", 5);
  CHECK(o.window == 5);
  CHECK_THROWS_AS(apply_sweep(file, o, "window", 2.5), ParseError);
  CHECK_THROWS_AS(apply_sweep(file, o, "m9.w", 1.0), ParseError);
  CHECK_THROWS_AS(apply_sweep(file, o, "m1.r", 1.0), ParseError);
  CHECK_THROWS_AS(apply_sweep(file, o, "alpha", 1.0), ParseError);
}
