#include <doctest.h>

#include <cmath>

#include "ccqed/error.hpp"
#include "ccqed/model.hpp"
#include "../oracles/fock.hpp"

using namespace ccqed;

namespace {

ModelParams params(int n, double lambda, std::optional<double> u = std::nullopt, double kappa = 1.0) {
  ModelParams p;
  p.half_length_N = n;
  p.kappa = kappa;
  p.lambda = lambda;
  p.hubbard_U = u;
  return p;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Validation;
}

}  // namespace

TEST_CASE("basis dimensions follow the closed forms") {
  for (int n = 1; n <= 6; ++n) {
    const auto p = params(n, 1.0, 1.0);
    const int m = 2 * n + 1;
    CHECK(enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin)->dim() == m + 1);
    CHECK(enumerate_basis(p, Sector::OneExcitation, ModelKind::Hubbard)->dim() == m + 1);
    CHECK(enumerate_basis(p, Sector::TwoExcitation, ModelKind::Spin)->dim() == m * (m + 1) / 2 + m);
    CHECK(enumerate_basis(p, Sector::TwoExcitation, ModelKind::Hubbard)->dim() == (m + 1) * (m + 2) / 2);
  }
  // 25 sites: 325 photon pairs plus 25 photon+atom states.
  CHECK(enumerate_basis(params(12, 1.0), Sector::TwoExcitation, ModelKind::Spin)->dim() == 350);
}

TEST_CASE("basis ordering: photon pairs, then photon+atom, then doubly excited e") {
  const auto b = enumerate_basis(params(2, 1.0, 1.0), Sector::TwoExcitation, ModelKind::Hubbard);
  const int m = b->sites();
  int i = 0;
  for (int a = 0; a < m; ++a)
    for (int c = a; c < m; ++c, ++i) {
      CHECK(b->state(i) == Configuration{a, c});
      CHECK(i == a * m - a * (a - 1) / 2 + (c - a));
    }
  for (int a = 0; a < m; ++a, ++i) CHECK(b->state(i) == Configuration{a, m});
  CHECK(b->state(i) == Configuration{m, m});
  CHECK(i + 1 == b->dim());

  const auto one = enumerate_basis(params(2, 1.0), Sector::OneExcitation, ModelKind::Spin);
  CHECK(one->state(0).first == one->mode_of_site(-2));
  CHECK(one->state(one->dim() - 1).first == one->atom_mode());
}

TEST_CASE("index_of round trips and rejects configurations outside the basis") {
  const auto hub = enumerate_basis(params(3, 1.0, 1.0), Sector::TwoExcitation, ModelKind::Hubbard);
  for (int i = 0; i < hub->dim(); ++i) CHECK(hub->index_of(hub->state(i)) == i);
  CHECK(hub->index_of({4, 1}) == hub->index_of({1, 4}));
  const auto spin = enumerate_basis(params(3, 1.0), Sector::TwoExcitation, ModelKind::Spin);
  CHECK_FALSE(spin->index_of({spin->atom_mode(), spin->atom_mode()}).has_value());
  CHECK_FALSE(spin->index_of({0, Configuration::kNoMode}).has_value());
  CHECK_FALSE(spin->index_of({0, 99}).has_value());
}

TEST_CASE("three-site chain with a decoupled atom") {
  const auto p = params(1, 0.0);
  const auto b = enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin);
  const Eigen::VectorXd e = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(build_hamiltonian(p, b).to_dense().real())
                                .eigenvalues();
  CHECK(e(0) == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::abs(e(1)) < 1e-14);
  CHECK(std::abs(e(2)) < 1e-14);
  CHECK(e(3) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("Hamiltonians equal the brute-force occupation-number construction") {
  for (int n = 1; n <= 3; ++n) {
    for (int exc : {1, 2}) {
      const Sector sector = exc == 1 ? Sector::OneExcitation : Sector::TwoExcitation;
      SUBCASE("spin") {
        const auto p = params(n, 1.3, std::nullopt, 0.7);
        const auto b = enumerate_basis(p, sector, ModelKind::Spin);
        const auto f = oracle::make_space(n, exc, true);
        const Eigen::MatrixXd ref = oracle::in_basis(f, oracle::hamiltonian(f, 0.7, 1.3, std::nullopt), *b);
        const Eigen::MatrixXcd h = build_spin_hamiltonian(p, b).to_dense();
        CHECK((h.real() - ref).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(h.imag().cwiseAbs().maxCoeff() == 0.0);
      }
      SUBCASE("hubbard") {
        for (double u : {0.0, 3.5, -2.0}) {
          const auto p = params(n, 1.3, u, 0.7);
          const auto b = enumerate_basis(p, sector, ModelKind::Hubbard);
          const auto f = oracle::make_space(n, exc, false);
          const Eigen::MatrixXd ref = oracle::in_basis(f, oracle::hamiltonian(f, 0.7, 1.3, u), *b);
          CHECK((build_hubbard_hamiltonian(p, b).to_dense().real() - ref).cwiseAbs().maxCoeff() < 1e-14);
        }
      }
    }
  }
}

TEST_CASE("bosonic factors on doubly occupied sites") {
  const double lambda = 1.7, kappa = 0.9;
  const auto p = params(2, lambda, 4.0, kappa);
  const auto b = enumerate_basis(p, Sector::TwoExcitation, ModelKind::Hubbard);
  const SparseOperator h = build_hamiltonian(p, b);
  const int c = b->center_mode(), e = b->atom_mode();
  const int pair = *b->index_of({c, c}), mixed = *b->index_of({c, e}), ee = *b->index_of({e, e});
  CHECK(h.element(mixed, pair).real() == doctest::Approx(std::sqrt(2.0) * lambda).epsilon(1e-15));
  CHECK(h.element(ee, mixed).real() == doctest::Approx(std::sqrt(2.0) * lambda).epsilon(1e-15));
  CHECK(h.element(ee, ee).real() == doctest::Approx(-4.0).epsilon(1e-15));
  const int hop = *b->index_of({c, c + 1});
  CHECK(h.element(hop, pair).real() == doctest::Approx(-std::sqrt(2.0) * kappa).epsilon(1e-15));

  const auto spin_p = params(2, lambda, std::nullopt, kappa);
  const auto sb = enumerate_basis(spin_p, Sector::TwoExcitation, ModelKind::Spin);
  const SparseOperator hs = build_hamiltonian(spin_p, sb);
  CHECK(hs.element(*sb->index_of({c, e}), *sb->index_of({c, c})).real() ==
        doctest::Approx(std::sqrt(2.0) * lambda).epsilon(1e-15));
}

TEST_CASE("spin model is the Hubbard model with the doubly excited site removed") {
  const auto sp = params(3, 2.0);
  const auto sb = enumerate_basis(sp, Sector::TwoExcitation, ModelKind::Spin);
  const SparseOperator hs = build_hamiltonian(sp, sb);
  for (double u : {0.0, 10.0}) {
    const auto hp = params(3, 2.0, u);
    const auto hb = enumerate_basis(hp, Sector::TwoExcitation, ModelKind::Hubbard);
    const SparseOperator hh = build_hamiltonian(hp, hb);
    double diff = 0.0;
    for (int i = 0; i < sb->dim(); ++i)
      for (int j = 0; j < sb->dim(); ++j)
        diff = std::max(diff, std::abs(hs.element(i, j) - hh.element(*hb->index_of(sb->state(i)),
                                                                       *hb->index_of(sb->state(j)))));
    CHECK(diff == 0.0);
  }
}

TEST_CASE("Hermitian, real, and commuting with parity and excitation number") {
  for (auto u : {std::optional<double>(), std::optional<double>(6.0)}) {
    const auto p = params(4, 2.0, u);
    for (auto sector : {Sector::OneExcitation, Sector::TwoExcitation}) {
      const auto b = enumerate_basis(p, sector, u ? ModelKind::Hubbard : ModelKind::Spin);
      const SparseOperator h = build_hamiltonian(p, b);
      CHECK(h.is_hermitian(0.0));
      CHECK(h.is_real());
      const SparseOperator parity = parity_operator(b);
      CHECK(commutator_norm(h, parity) < 1e-12);
      CHECK(commutator_norm(h, total_excitation_operator(b)) < 1e-12);
      const Eigen::MatrixXcd p2 = (parity * parity).to_dense();
      CHECK((p2 - Eigen::MatrixXcd::Identity(b->dim(), b->dim())).norm() == 0.0);
      const Eigen::MatrixXcd n = total_excitation_operator(b).to_dense();
      CHECK((n - double(b->excitations()) * Eigen::MatrixXcd::Identity(b->dim(), b->dim())).norm() == 0.0);
    }
  }
}

TEST_CASE("builder errors") {
  const auto spin_p = params(3, 1.0);
  const auto hub_p = params(3, 1.0, 2.0);
  const auto spin_b = enumerate_basis(spin_p, Sector::TwoExcitation, ModelKind::Spin);
  const auto hub_b = enumerate_basis(hub_p, Sector::TwoExcitation, ModelKind::Hubbard);
  CHECK(code_of([&] { build_spin_hamiltonian(spin_p, hub_b); }) == ErrorCode::BasisMismatch);
  CHECK(code_of([&] { build_hubbard_hamiltonian(hub_p, spin_b); }) == ErrorCode::BasisMismatch);
  CHECK(code_of([&] { build_hubbard_hamiltonian(spin_p, hub_b); }) == ErrorCode::InvalidParams);
  CHECK(code_of([&] { build_spin_hamiltonian(params(4, 1.0), spin_b); }) == ErrorCode::BasisMismatch);
  CHECK(code_of([&] { build_kicked_hamiltonian(spin_p, {1.0, 1.0, 0.1}, spin_b); }) == ErrorCode::BasisMismatch);
  CHECK(code_of([&] { params(0, 1.0).validate(); }) == ErrorCode::InvalidParams);
  CHECK(code_of([&] { params(3, 1.0, std::nullopt, 0.0).validate(); }) == ErrorCode::InvalidParams);
  CHECK(code_of([&] { params(3, std::nan("")).validate(); }) == ErrorCode::InvalidParams);
  CHECK(code_of([&] { PulseSpec{1.0, 0.5, 0.0}.validate(); }) == ErrorCode::InvalidPulse);
}

TEST_CASE("kicked Hamiltonian potential") {
  const auto p = params(3, 0.8);
  const auto b = enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin);
  const KickedHamiltonian k = build_kicked_hamiltonian(p, {2.0, 1.0, 0.5}, b);
  CHECK(k.potential(0.9) == 0.0);
  CHECK(k.potential(1.2) == doctest::Approx(4.0));
  CHECK(k.potential(1.6) == 0.0);
  CHECK(k.e_index == b->atom_mode());
  const SparseOperator during = k.during_pulse();
  CHECK(during.element(k.e_index, k.e_index).real() == doctest::Approx(4.0));
  CHECK((during - k.h0).frobenius_norm() == doctest::Approx(4.0));
}

TEST_CASE("sparse operator assembly and algebra") {
  const auto b = enumerate_basis(params(1, 1.0), Sector::OneExcitation, ModelKind::Spin);
  const SparseOperator a(b, {{0, 1, 1.0}, {0, 1, 2.0}, {1, 0, 3.0}, {2, 2, 0.0}, {3, 3, Complex(0, 1)}});
  CHECK(a.nonzeros() == 3);
  CHECK(a.element(0, 1) == Complex(3.0));
  CHECK(a.hermitian_defect() == doctest::Approx(2.0));
  CHECK_FALSE(a.is_real());
  CHECK(a.norm_bound() == doctest::Approx(3.0));
  const Eigen::MatrixXcd d = a.to_dense();
  CHECK(((a * a).to_dense() - d * d).norm() == 0.0);
  const Amplitudes x = Amplitudes::LinSpaced(4, 1.0, 4.0);
  CHECK(((a * x) - d * x).norm() == 0.0);
}
