#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <limits>
#include <random>
#include <vector>

#include "msvi/kernels.hpp"

using namespace msvi::kernels;

namespace {
std::vector<const Table*> vector_tables() {
  std::vector<const Table*> out;
  for (Isa isa : {Isa::avx2, Isa::neon})
    if (const Table* t = table_for(isa)) out.push_back(t);
  return out;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}
}  // namespace

TEST_CASE("dispatch") {
  CHECK(table_for(Isa::scalar) == &scalar_table());
  const Table& act = active();
  CHECK(act.name != nullptr);
  MESSAGE("active kernels: " << std::string(act.name));
}

TEST_CASE("vector kernels match the scalar reference bit for bit") {
  const auto tables = vector_tables();
  if (tables.empty()) MESSAGE("no vector ISA available; only the scalar path is exercised");
  const Table& ref = scalar_table();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-5, 5);
  for (const Table* t : tables) {
    CAPTURE(t->name);
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 31u, 64u, 401u}) {
      std::vector<double> x(n), y(n), f(n), s(n + 2);
      for (auto* v : {&x, &y, &f, &s})
        for (double& e : *v) e = u(rng);
      std::vector<double> o1(n), o2(n);
      ref.axpy(x.data(), 0.05, y.data(), o1.data(), n);
      t->axpy(x.data(), 0.05, y.data(), o2.data(), n);
      CHECK(same_bits(o1, o2));

      ref.wave_update(x.data(), s.data() + 1, f.data(), 0.05, 0.01, o1.data(), n);
      t->wave_update(x.data(), s.data() + 1, f.data(), 0.05, 0.01, o2.data(), n);
      CHECK(same_bits(o1, o2));

      const ScanResult r1 = ref.scan(x.data(), n), r2 = t->scan(x.data(), n);
      CHECK(r1.finite == r2.finite);
      CHECK(r1.max_abs == r2.max_abs);

      CHECK(ref.min_sq_distance(0.3, -1.2, x.data(), y.data(), n) ==
            t->min_sq_distance(0.3, -1.2, x.data(), y.data(), n));
    }
  }
}

TEST_CASE("scan flags non-finite entries in every lane position") {
  std::vector<const Table*> all = vector_tables();
  all.push_back(&scalar_table());
  for (const Table* t : all) {
    for (std::size_t n : {1u, 4u, 6u, 13u}) {
      for (std::size_t bad = 0; bad < n; ++bad) {
        for (double poison : {std::nan(""), std::numeric_limits<double>::infinity(),
                              -std::numeric_limits<double>::infinity()}) {
          std::vector<double> x(n, 1.0);
          x[bad] = poison;
          CHECK_FALSE(t->scan(x.data(), n).finite);
        }
      }
    }
    const std::vector<double> x{-3.0, 2.0, 0.5, -7.5, 1.0};
    const ScanResult r = t->scan(x.data(), x.size());
    CHECK(r.finite);
    CHECK(r.max_abs == 7.5);
  }
}

TEST_CASE("scalar reference values") {
  const Table& k = scalar_table();
  const double p0[] = {0.0}, s[] = {0.0, M_PI, 0.0}, f[] = {std::sin(M_PI)};
  double out[1];
  k.wave_update(p0, s + 1, f, 1.0, 1.0, out, 1);
  CHECK(out[0] == doctest::Approx(-2 * M_PI).epsilon(1e-15));
  const double cx[] = {0.0, 3.0}, cy[] = {0.0, 4.0};
  CHECK(k.min_sq_distance(3.0, 3.0, cx, cy, 2) == 1.0);
  CHECK(std::isinf(k.min_sq_distance(0, 0, cx, cy, 0)));
}
