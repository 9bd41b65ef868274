// SPDX-License-Identifier: Apache-2.0
#include "gradient_suite.hpp"
#include "helpers.hpp"

#include "tabllp/losses/losses.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace tabllp;
using namespace tabllp::losses;
using diff::Matrix;
using data::Index;
using testing::counts_proportion;

namespace {

Tensor row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) m(0, k++) = x;
  return Tensor(m);
}

Tensor rows(std::initializer_list<std::initializer_list<double>> v) {
  Matrix m(static_cast<Index>(v.size()), static_cast<Index>(v.begin()->size()));
  Index i = 0;
  for (const auto& r : v) {
    Index j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return Tensor(m);
}

}  // namespace

TEST_CASE("llp_loss examples") {
  const auto half = counts_proportion({1, 1});
  CHECK(llp_loss(row({0.5, 0.5}), half).item() == doctest::Approx(0.0));
  CHECK(llp_loss(row({0.25, 0.75}), half).item() == doctest::Approx(0.143841).epsilon(1e-6));
  CHECK(llp_loss(row({1e-12, 1.0 - 1e-12}), counts_proportion({1, 0})).item() ==
        doctest::Approx(27.631021).epsilon(1e-6));
  CHECK_THROWS_AS(llp_loss(row({0.2, 0.3, 0.5}), half), std::invalid_argument);
}

TEST_CASE("instance_ce examples") {
  const std::vector<int> labels{0, 1};
  CHECK(instance_ce(rows({{1, 0}, {0, 1}}), labels).item() == doctest::Approx(0.0));
  CHECK(instance_ce(rows({{0.5, 0.5}, {0.5, 0.5}}), labels).item() == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(instance_ce(rows({{0, 1}}), std::vector<int>{1}).item() == doctest::Approx(0.0));
}

TEST_CASE("diff_contrastive examples") {
  CHECK(diff_contrastive(rows({{1, 2}}), rows({{3, -1}}), {{0, 0}}, 0.5).value.item() == doctest::Approx(0.0));
  // z_1 = (1, 0) matches bag-2 row 0 and is orthogonal to row 1.
  const Tensor z1 = rows({{1, 0}, {0, 1}});
  const Tensor z2 = rows({{1, 0}, {0, 1}});
  const double expected = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));
  CHECK(expected == doctest::Approx(0.313262).epsilon(1e-6));
  CHECK(diff_contrastive(z1, z2, {{0, 0}}, 1.0).value.item() == doctest::Approx(expected));
  CHECK(diff_contrastive(z1, z2, {{0, 0}, {1, 1}}, 1.0).value.item() == doctest::Approx(expected));

  testing::Rng rng(1);
  const Tensor a(testing::random_matrix(4, 3, rng)), b(testing::random_matrix(4, 3, rng));
  const PairList p{{0, 2}, {1, 0}, {3, 1}};
  const PairList q{{3, 1}, {0, 2}, {1, 0}};
  CHECK(diff_contrastive(a, b, p, 0.5).value.item() == doctest::Approx(diff_contrastive(a, b, q, 0.5).value.item()));

  const auto empty = diff_contrastive(a, b, {}, 0.5);
  CHECK(empty.flagged);
  CHECK(empty.value.item() == 0.0);
  CHECK_THROWS_AS(diff_contrastive(a, b, p, 0.0), std::invalid_argument);
}

TEST_CASE("diff_contrastive is rotation invariant") {
  testing::Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 5;
    const Matrix q = Eigen::HouseholderQR<Matrix>(testing::random_matrix(d, d, rng)).householderQ();
    const Matrix a = testing::random_matrix(6, d, rng), b = testing::random_matrix(6, d, rng);
    const PairList p{{0, 1}, {2, 2}, {5, 3}};
    const double base = diff_contrastive(Tensor(a), Tensor(b), p, 0.3).value.item();
    const double turned = diff_contrastive(Tensor(Matrix(a * q)), Tensor(Matrix(b * q)), p, 0.3).value.item();
    CHECK(std::abs(base - turned) < 1e-8);
  }
}

TEST_CASE("cosine_embedding examples") {
  const Tensor z = rows({{1, 2}, {-1, 0.5}});
  CHECK(cosine_embedding(z, z, {{0, 0}, {1, 1}}, {}, 0.0).value.item() == doctest::Approx(0.0));
  CHECK(cosine_embedding(rows({{1, 0}}), rows({{0, 1}}), {}, {{0, 0}}, 0.1).value.item() == doctest::Approx(0.0));
  const auto neg_only = cosine_embedding(rows({{1, 0}}), rows({{2, 0}}), {}, {{0, 0}}, 0.0);
  CHECK(neg_only.value.item() == doctest::Approx(1.0));
  CHECK(neg_only.flagged);
}

TEST_CASE("self_contrastive examples") {
  CHECK(self_contrastive(rows({{1, 3}}), rows({{-2, 1}}), 0.5).item() == doctest::Approx(0.0));
  const Tensor z = rows({{1, 0}, {0, 1}});
  CHECK(self_contrastive(z, z, 1.0).item() == doctest::Approx(0.626523).epsilon(1e-6));
  testing::Rng rng(3);
  const Matrix a = testing::random_matrix(5, 3, rng), b = testing::random_matrix(5, 3, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
  perm.indices() << 3, 0, 4, 1, 2;
  CHECK(self_contrastive(Tensor(Matrix(perm * a)), Tensor(Matrix(perm * b)), 0.4).item() ==
        doctest::Approx(self_contrastive(Tensor(a), Tensor(b), 0.4).item()));
  CHECK_THROWS_AS(self_contrastive(Tensor(a), Tensor(Matrix(b.topRows(4))), 0.4), std::invalid_argument);
}

TEST_CASE("reconstruction_loss examples") {
  testing::Rng rng(4);
  auto ds = testing::toy_dataset(5, rng);
  std::vector<Index> all(5);
  std::iota(all.begin(), all.end(), Index{0});
  const auto batch = ds.gather(all);

  std::vector<Tensor> perfect;
  for (Index j = 0; j < 2; ++j) perfect.push_back(Tensor(Matrix(batch.values.col(j).matrix())));
  Matrix logits = Matrix::Constant(5, 3, -800.0);
  for (Index i = 0; i < 5; ++i) {
    if (!batch.missing(i, 2)) logits(i, static_cast<Index>(batch.values(i, 2))) = 800.0;
  }
  perfect.push_back(Tensor(logits));
  CHECK(reconstruction_loss(perfect, batch, ds.schema(), 1.0).item() == doctest::Approx(0.0));
  CHECK(reconstruction_loss(perfect, batch, ds.schema(), 0.0).item() == 0.0);

  // Single numeric column, every prediction off by one.
  std::vector<data::ColumnSchema> one(1);
  one[0].name = "x";
  data::Batch b{data::CellArray::Constant(4, 1, 2.0), data::MaskArray::Constant(4, 1, false)};
  const std::vector<Tensor> off{Tensor(Matrix::Constant(4, 1, 3.0))};
  CHECK(reconstruction_loss(off, b, one, 0.7).item() == doctest::Approx(0.7));
  // missing cells drop out
  b.missing(0, 0) = true;
  CHECK(reconstruction_loss(off, b, one, 1.0).item() == doctest::Approx(0.75));
}

TEST_CASE("bag_contrastive examples") {
  const auto p = counts_proportion({1, 3});
  const Tensor b = row({0.3, -0.2, 0.9});
  CHECK(bag_contrastive(b, b, p, p, 0.0).item() == doctest::Approx(0.0));
  const auto one = counts_proportion({1, 0}), other = counts_proportion({0, 1});
  CHECK(bag_contrastive(row({1, 0}), row({0, 1}), one, other, 0.2).item() == doctest::Approx(0.0));
  // mPIoU((1/3, 2/3), (2/3, 1/3)) = 0.5 and cos = 1.
  CHECK(bag_contrastive(b, b, counts_proportion({1, 2}), counts_proportion({2, 1}), 0.0).item() ==
        doctest::Approx(0.5));
}

TEST_CASE("ramp weights") {
  auto w = ramp_weights(10, 10);
  CHECK(w.lambda == 1.0);
  CHECK(w.gamma == 0.0);
  w = ramp_weights(0, 10);
  CHECK(std::abs(w.lambda - std::exp(-5.0)) < 1e-12);
  CHECK(w.lambda == doctest::Approx(0.0067379).epsilon(1e-6));
  CHECK(w.gamma == doctest::Approx(0.9932621).epsilon(1e-7));
  CHECK(ramp_weights(5, 10).lambda == doctest::Approx(0.286505).epsilon(1e-6));
  for (int k = 0; k <= 300; ++k) {
    const auto r = ramp_weights(k, 300);
    CHECK(r.lambda + r.gamma == 1.0);
  }
  CHECK_THROWS_AS(ramp_weights(11, 10), std::invalid_argument);
  CHECK_THROWS_AS(ramp_weights(-1, 10), std::invalid_argument);
}

TEST_CASE("finetune_loss composition") {
  testing::Rng rng(5);
  const Tensor z1(testing::random_matrix(4, 3, rng)), z2(testing::random_matrix(4, 3, rng));
  const Tensor probs = rows({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
  const auto half = counts_proportion({2, 2});
  FinetuneInputs in{z1, z2, probs, probs, half, half, {{0, 1}, {1, 0}}, {}};
  const LossConfig cfg;
  const auto at_end = finetune_loss(in, 10, 10, cfg);
  CHECK(at_end.total.item() == doctest::Approx(diff_contrastive(z1, z2, in.positives, cfg.tau).value.item()));
  const auto mid = finetune_loss(in, 3, 10, cfg);
  CHECK(mid.total.item() == doctest::Approx(mid.weights.lambda * mid.contrastive.item() +
                                            mid.weights.gamma * mid.llp.item()));
  in.positives.clear();
  const auto zero = finetune_loss(in, 3, 10, cfg);
  CHECK(zero.empty_positives);
  CHECK(zero.total.item() == doctest::Approx(0.0));
}

TEST_CASE("pretrain_loss composition") {
  testing::Rng rng(6);
  PretrainInputs in;
  in.b1 = Tensor(testing::random_matrix(1, 4, rng));
  in.b2 = in.b1;
  in.p1 = in.p2 = counts_proportion({1, 1});
  in.view = Tensor(testing::random_matrix(3, 4, rng));
  in.other_view = Tensor(testing::random_matrix(3, 4, rng));
  LossConfig cfg;
  cfg.beta = 0.0;
  CHECK(pretrain_loss(in, cfg).total.item() == doctest::Approx(0.0));
  cfg.beta = 1.0;
  cfg.alpha = 0.0;
  CHECK(pretrain_loss(in, cfg).total.item() == doctest::Approx(self_contrastive(in.view, in.other_view, cfg.tau).item()));
  LossConfig bad;
  bad.tau = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = LossConfig{};
  bad.margin = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("Jensen gap: bag loss never exceeds instance cross-entropy") {
  testing::Rng rng(7);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index m = std::uniform_int_distribution<Index>(1, 64)(rng);
    const Index c = std::uniform_int_distribution<Index>(2, 5)(rng);
    const Tensor probs = diff::softmax(Tensor(testing::random_matrix(m, c, rng, -4, 4)));
    std::vector<int> labels;
    data::LabelProportion p{Eigen::RowVectorXd::Zero(c)};
    for (Index i = 0; i < m; ++i) {
      labels.push_back(std::uniform_int_distribution<int>(0, static_cast<int>(c) - 1)(rng));
      p.entries(labels.back()) += 1.0 / static_cast<double>(m);
    }
    const double bag = llp_loss(mean_prediction(probs), p).item();
    CHECK(bag >= -1e-12);
    violations += bag > instance_ce(probs, labels).item() + 1e-9;
  }
  CHECK(violations == 0);
}

TEST_CASE("loss gradients match finite differences") {
  for (const auto& family : testing::gradient_families()) {
    CAPTURE(family.name);
    const auto r = testing::run_family(family, 20, 1000);
    CHECK(r.accepted == 20);
    CHECK(r.max_rel_error < 1e-4);
  }
}
