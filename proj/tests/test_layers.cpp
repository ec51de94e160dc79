// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "oracles.hpp"

#include "gclgcn/layers.hpp"
#include "gclgcn/optim.hpp"

#include <cmath>

using namespace gclgcn;
using doctest::Approx;

namespace {

std::vector<Parameter*> params_of(AEParams& p) {
  std::vector<Parameter*> out;
  collect(p, out);
  return out;
}

}  // namespace

TEST_CASE("ae_forward with zero parameters is zero everywhere") {
  std::mt19937_64 rng(1);
  AEParams p = init_ae({4, 6, 3}, rng);
  for (auto* q : params_of(p)) q->value.setZero();
  Tape t;
  auto out = ae_forward(t, p, t.constant(testing::random_matrix(5, 4, rng)));
  REQUIRE(out.hidden.size() == 2);
  for (const auto& h : out.hidden) CHECK(h.value().isZero());
  CHECK(out.reconstruction.value().isZero());
  CHECK(out.reconstruction.cols() == 4);
  CHECK(out.hidden.back().cols() == 3);
}

TEST_CASE("ae_forward first layer is identity on nonnegative input") {
  std::mt19937_64 rng(2);
  AEParams p = init_ae({3, 3, 2}, rng);
  p.encoder[0].weight.value = Matrix::Identity(3, 3);
  p.encoder[0].bias.value.setZero();
  Matrix x = testing::random_matrix(4, 3, rng).cwiseAbs();
  Tape t;
  auto out = ae_forward(t, p, t.constant(x));
  CHECK(out.hidden[0].value() == x);
}

TEST_CASE("ae gradient check over seeds") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    AEParams p = init_ae({8, 7, 5, 3}, rng);
    const Matrix x = testing::random_matrix(6, 8, rng);
    auto ps = params_of(p);
    const double err = ad::finite_difference_check(
        [&](Tape& t) {
          Var xv = t.constant(x);
          return ad::mse(ae_forward(t, p, xv).reconstruction, xv);
        },
        ps);
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("ae_loss") {
  Tape t;
  Matrix x(1, 2);
  x << 1, 1;
  CHECK(ae_loss(t.constant(x), t.constant(x)).scalar() == 0.0);
  CHECK(ae_loss(t.constant(x), t.constant(Matrix::Zero(1, 2))).scalar() == 1.0);
  std::mt19937_64 rng(3);
  Matrix a = testing::random_matrix(3, 4, rng);
  Matrix b = testing::random_matrix(3, 4, rng);
  Matrix a2(6, 4), b2(6, 4);
  a2 << a, a;
  b2 << b, b;
  CHECK(ae_loss(t.constant(a2), t.constant(b2)).scalar() ==
        Approx(ae_loss(t.constant(a), t.constant(b)).scalar()).epsilon(1e-14));
}

TEST_CASE("gcn_layer") {
  SUBCASE("edgeless identity") {
    std::mt19937_64 rng(4);
    Graph g(Matrix::Zero(3, 3), {});
    Matrix z = testing::random_matrix(3, 3, rng).cwiseAbs();
    Tape t;
    Var out = gcn_layer(t.constant(normalize_adjacency(g).matrix), t.constant(z),
                        t.constant(Matrix::Identity(3, 3)), true);
    CHECK(out.value() == z);
  }
  SUBCASE("single edge pre-activation") {
    Graph g(Matrix::Zero(2, 2), {{0, 1}});
    Tape t;
    Var out = gcn_layer(t.constant(normalize_adjacency(g).matrix), t.constant(Matrix::Identity(2, 2)),
                        t.constant(Matrix::Identity(2, 2)), false);
    CHECK((out.value() - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("gradient check") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      std::mt19937_64 rng(seed);
      Graph g = testing::erdos_renyi(5, 0.4, seed);
      const Matrix a = normalize_adjacency(g).matrix;
      Parameter z("z", testing::random_matrix(5, 4, rng));
      Parameter w("w", testing::random_matrix(4, 3, rng));
      const Matrix target = testing::random_matrix(5, 3, rng);
      std::vector<Parameter*> ps{&z, &w};
      CHECK(ad::finite_difference_check(
                [&](Tape& t) {
                  return ad::mse(gcn_layer(t.constant(a), t.parameter(z), t.parameter(w), true), t.constant(target));
                },
                ps) <= 1e-4);
    }
  }
}

TEST_CASE("attention structure validates bias coverage") {
  Graph g = testing::path3();
  SpatialBias partial;
  partial.entries.resize(3);
  partial.entries[0] = {{0, 0.0}, {1, 1.0}};
  partial.entries[1] = {{0, 1.0}, {1, 0.0}};  // missing (1,2)
  partial.entries[2] = {{1, 1.0}, {2, 0.0}};
  CHECK_THROWS_AS(make_attention_structure(g, partial), ContractError);
  const auto s = make_attention_structure(g, spatial_bias(g, SpatialMode::ShortestPath), -1.0);
  CHECK(s.bias(0, 1) == -1.0);
  CHECK_FALSE(s.mask(0, 2));
  CHECK(s.mask(2, 2));
}

TEST_CASE("graphormer layer behaviour") {
  SUBCASE("isolated node attends only to itself") {
    std::mt19937_64 rng(5);
    Graph g(testing::random_matrix(3, 2, rng), {{0, 1}});
    const auto structure = make_attention_structure(g, spatial_bias(g, SpatialMode::Euclidean));
    GraphormerParams p = init_graphormer({2, 3}, 3, 2, rng);
    const Matrix c = composite_centrality(g, {CentralityMeasure::Degree, CentralityMeasure::Betweenness,
                                              CentralityMeasure::Closeness}).values;
    Tape t;
    Var z = t.constant(g.features());
    Var cv = t.constant(c);
    std::vector<Var> att;
    auto w = bind(t, p.encoder[0]);
    Var out = graphormer_layer(z, cv, structure, w, 2, true, &att);
    REQUIRE(att.size() == 2);
    for (const auto& a : att) CHECK(a.value()(2, 2) == 1.0);
    Var v = ad::add(ad::matmul(z, w.value), ad::matmul(cv, w.c_value));
    const Matrix& vv = v.value();
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double mean = 0.5 * (vv(2, j) + vv(2, 3 + j));
      const double want = mean > 0 ? mean : 0.01 * mean;
      CHECK(out.value()(2, j) == Approx(want).epsilon(1e-12));
    }
  }
  SUBCASE("symmetric pair splits attention evenly") {
    Graph g(Matrix::Ones(2, 3), {{0, 1}});
    std::mt19937_64 rng(6);
    GraphormerParams p = init_graphormer({3, 4}, 1, 3, rng);
    const auto structure = make_attention_structure(g, spatial_bias(g, SpatialMode::Euclidean));
    Tape t;
    std::vector<Var> att;
    graphormer_layer(t.constant(g.features()), t.constant(Matrix::Ones(2, 1)), structure, bind(t, p.encoder[0]), 3,
                     true, &att);
    for (const auto& a : att) {
      CHECK(a.value()(0, 0) == 0.5);
      CHECK(a.value()(0, 1) == 0.5);
    }
  }
}

TEST_CASE("graphormer attention rows sum to one and gradients check") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed);
    Graph g = testing::erdos_renyi(4, 0.5, seed, 3);
    const auto structure = make_attention_structure(g, spatial_bias(g, SpatialMode::Euclidean));
    const Matrix c = composite_centrality(g, {CentralityMeasure::Degree, CentralityMeasure::Betweenness,
                                              CentralityMeasure::Closeness}).values;
    GraphormerParams p = init_graphormer({3, 2}, 3, 2, rng);
    Parameter z("z", g.features());
    const Matrix target = testing::random_matrix(4, 2, rng);

    Tape t;
    std::vector<Var> att;
    graphormer_layer(t.parameter(z), t.constant(c), structure, bind(t, p.encoder[0]), 2, true, &att);
    for (const auto& a : att)
      for (Eigen::Index i = 0; i < 4; ++i) CHECK(std::abs(a.value().row(i).sum() - 1.0) <= 1e-12);

    std::vector<Parameter*> ps{&z};
    collect(p, ps);
    CHECK(ad::finite_difference_check(
              [&](Tape& tt) {
                return ad::mse(graphormer_layer(tt.parameter(z), tt.constant(c), structure, bind(tt, p.encoder[0]),
                                                2, true),
                               tt.constant(target));
              },
              ps) <= 1e-4);
  }
}

TEST_CASE("graphormer layer is permutation equivariant") {
  std::mt19937_64 rng(77);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Graph g = testing::erdos_renyi(9, 0.35, seed, 3);
    const auto perm = testing::random_permutation(g.n(), rng);
    Graph h = testing::permute_graph(g, perm);
    GraphormerParams p = init_graphormer({3, 4}, 3, 2, rng);
    const std::vector all{CentralityMeasure::Degree, CentralityMeasure::Betweenness, CentralityMeasure::Closeness};
    auto run = [&](const Graph& gr) {
      Tape t;
      return Matrix(graphormer_layer(t.constant(gr.features()), t.constant(composite_centrality(gr, all).values),
                                     make_attention_structure(gr, spatial_bias(gr, SpatialMode::Euclidean)),
                                     bind(t, p.encoder[0]), 2, true)
                        .value());
    };
    const Matrix og = run(g);
    const Matrix oh = run(h);
    for (std::size_t i = 0; i < g.n(); ++i) {
      CHECK((oh.row(static_cast<Eigen::Index>(perm[i])) - og.row(static_cast<Eigen::Index>(i))).cwiseAbs().maxCoeff() <
            1e-12);
    }
  }
}

TEST_CASE("augment_features") {
  std::mt19937_64 rng(8);
  const Matrix x = testing::random_matrix(100, 100, rng);
  CHECK(augment_features(x, 0.0, 1) == x);
  CHECK(augment_features(x, 1.0, 1).isZero());
  const Matrix a = augment_features(x, 0.3, 5);
  const double zeroed = static_cast<double>((a.array() == 0.0).count()) / 1e4;
  CHECK(zeroed >= 0.27);
  CHECK(zeroed <= 0.33);
  CHECK(a == augment_features(x, 0.3, 5));
  CHECK_THROWS_AS(augment_features(x, 1.5, 1), ConfigError);
}

TEST_CASE("contrastive encoder") {
  std::mt19937_64 rng(9);
  Graph g(Matrix::Zero(3, 3), {});
  const Matrix a = normalize_adjacency(g).matrix;
  const Matrix x = testing::random_matrix(3, 3, rng).cwiseAbs();
  Tape t;
  CHECK(contrastive_encoder(t.constant(a), t.constant(x), t.constant(Matrix::Zero(3, 4)), t.constant(Matrix::Zero(4, 3)))
            .value()
            .isZero());
  CHECK(contrastive_encoder(t.constant(a), t.constant(x), t.constant(Matrix::Identity(3, 3)),
                            t.constant(Matrix::Identity(3, 3)))
            .value() == x);
}

TEST_CASE("combined similarity hand values") {
  Tape t;
  Matrix u(1, 2), v(1, 2), w(1, 2);
  u << 1, 0;
  v << 0, 1;
  w << -1, 0;
  for (double beta : {0.5, 1.0, 2.0}) {
    CHECK(combined_similarity(t.constant(u), t.constant(u), beta).value()(0, 0) == Approx(1.0).epsilon(1e-11));
  }
  CHECK(combined_similarity(t.constant(u), t.constant(v), 1.7).value()(0, 0) == 0.0);
  CHECK(combined_similarity(t.constant(u), t.constant(w), 1.0).value()(0, 0) == Approx(-1.0 / 3.0).epsilon(1e-11));
}

TEST_CASE("combined similarity diagonal is one when views coincide") {
  std::mt19937_64 rng(10);
  const Matrix c = testing::random_matrix(6, 5, rng);
  Tape t;
  const Matrix s = combined_similarity(t.constant(c), t.constant(c), 0.7).value();
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(s(i, i) == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("contrastive loss") {
  Tape t;
  CHECK(contrastive_loss(t.constant(Matrix::Zero(2, 2)), 0.5).scalar() == Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(contrastive_loss(t.constant(Matrix::Identity(2, 2)), 1.0).scalar() ==
        Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-14));
  CHECK(contrastive_loss(t.constant(Matrix::Identity(2, 2)), 1.0).scalar() == Approx(0.3133).epsilon(1e-4));

  std::mt19937_64 rng(11);
  const Matrix s = testing::random_matrix(5, 5, rng);
  const auto perm = testing::random_permutation(5, rng);
  Matrix ps(5, 5);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) ps(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j])) = s(i, j);
  CHECK(contrastive_loss(t.constant(ps), 0.7).scalar() == Approx(contrastive_loss(t.constant(s), 0.7).scalar()).epsilon(1e-13));
  CHECK_THROWS_AS(contrastive_loss(t.constant(s), 0.0), ConfigError);
}

TEST_CASE("contrastive loss decreases as the diagonal grows") {
  std::mt19937_64 rng(12);
  const Matrix s = testing::random_matrix(6, 6, rng, 0.3);
  Tape t;
  const double base = contrastive_loss(t.constant(s), 0.5).scalar();
  double prev = base;
  for (double bump : {0.01, 0.1, 1.0}) {
    Matrix s2 = s;
    s2.diagonal().array() += bump;
    const double l = contrastive_loss(t.constant(s2), 0.5).scalar();
    CHECK(l < base);
    CHECK(l < prev);
    prev = l;
  }
}

TEST_CASE("contrastive encoder and loss gradient check") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed);
    Graph g = testing::erdos_renyi(6, 0.4, seed, 4);
    const Matrix a = normalize_adjacency(g).matrix;
    ContrastiveParams p = init_contrastive(4, 5, rng);
    const Matrix x = testing::random_matrix(6, 4, rng);
    const Matrix xa = augment_features(x, 0.3, seed);
    std::vector<Parameter*> ps;
    collect(p, ps);
    for (double beta : {1.0, 2.0}) {
      CHECK(ad::finite_difference_check(
                [&](Tape& t) {
                  Var w0 = t.parameter(p.w0), w1 = t.parameter(p.w1);
                  Var c1 = contrastive_encoder(t.constant(a), t.constant(x), w0, w1);
                  Var c2 = contrastive_encoder(t.constant(a), t.constant(xa), w0, w1);
                  return contrastive_loss(combined_similarity(c1, c2, beta), 0.5);
                },
                ps) <= 1e-4);
    }
  }
}

TEST_CASE("inner product decoder") {
  Tape t;
  CHECK(inner_product_decode(t.constant(Matrix::Zero(3, 2))).value() == Matrix::Constant(3, 3, 0.5));
  Matrix z(2, 2);
  z << 2, 0, 0, 1;
  const Matrix a = inner_product_decode(t.constant(z)).value();
  CHECK(a(0, 1) == 0.5);
  CHECK(a(0, 0) == Approx(1.0 / (1.0 + std::exp(-4.0))));
  CHECK(a(1, 1) == Approx(1.0 / (1.0 + std::exp(-1.0))));
  std::mt19937_64 rng(13);
  const Matrix r = inner_product_decode(t.constant(testing::random_matrix(5, 3, rng))).value();
  CHECK(r == r.transpose());
}
