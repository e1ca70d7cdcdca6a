#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "seisgn/convolution.hpp"
#include "seisgn/error.hpp"
#include "seisgn/inversion.hpp"
#include "seisgn/jacobian.hpp"
#include "support.hpp"

using namespace seisgn;
using seisgn::testing::collect_blocks;
using seisgn::testing::relative_difference;
using seisgn::testing::ToyProblem;

TEST(Convolve, SmallCases) {
  const std::vector<double> delta{1.0, 0.0, 0.0}, xyz{2.0, 3.0, 5.0};
  EXPECT_EQ(convolve(delta, xyz), (std::vector<double>{2.0, 3.0, 5.0, 0.0, 0.0}));
  const std::vector<double> ones{1.0, 1.0};
  EXPECT_EQ(convolve(ones, ones), (std::vector<double>{1.0, 2.0, 1.0}));
  EXPECT_THROW(convolve(std::vector<double>{}, ones), ValidationError);
}

TEST(Convolve, Commutative) {
  std::mt19937 rng(3);
  const auto a = seisgn::testing::random_trace(rng, 37), b = seisgn::testing::random_trace(rng, 37);
  const auto ab = convolve(a, b), ba = convolve(b, a);
  ASSERT_EQ(ab.size(), 73u);
  for (std::size_t k = 0; k < ab.size(); ++k) EXPECT_NEAR(ab[k], ba[k], 1e-12);
}

TEST(SpectralConvolver, MatchesDirectConvolution) {
  std::mt19937 rng(5);
  for (std::size_t n : {1u, 2u, 17u, 64u, 100u}) {
    SpectralConvolver conv(n);
    const auto a = seisgn::testing::random_trace(rng, n), b = seisgn::testing::random_trace(rng, n);
    const auto sa = conv.transform(a), sb = conv.transform(b);
    SpectralConvolver::Spectrum p(sa.size());
    for (std::size_t f = 0; f < p.size(); ++f) p[f] = sa[f] * sb[f];
    std::vector<double> out(conv.output_length());
    conv.inverse(p, out);
    const auto direct = convolve(a, b);
    for (std::size_t k = 0; k < out.size(); ++k) EXPECT_NEAR(out[k], direct[k], 1e-12) << "n=" << n;
  }
}

namespace {

ShotRecord random_record(std::mt19937& rng, std::size_t nr, std::size_t nt) {
  ShotRecord r(0, nr, nt, 1e-3);
  r.samples = seisgn::testing::random_trace(rng, nr * nt);
  return r;
}

}  // namespace

TEST(ModifiedResidual, ZeroForIdenticalRecords) {
  std::mt19937 rng(1);
  const ShotRecord d = random_record(rng, 4, 20);
  const ResidualVector r = modified_residual(d, d, 1);
  EXPECT_EQ(r.values.size(), 4u * 39u);
  for (double x : r.values) EXPECT_NEAR(x, 0.0, 1e-15);
}

TEST(ModifiedResidual, ReferenceTraceVanishes) {
  std::mt19937 rng(2);
  const ShotRecord f = random_record(rng, 3, 16), d = random_record(rng, 3, 16);
  const ResidualVector r = modified_residual(f, d, 2);
  for (double x : r.segment(0, 2)) EXPECT_NEAR(x, 0.0, 1e-14);
  double other = 0.0;
  for (double x : r.segment(0, 1)) other = std::max(other, std::abs(x));
  EXPECT_GT(other, 0.1);
}

TEST(ModifiedResidual, BilinearInEstimate) {
  std::mt19937 rng(4);
  const ShotRecord f = random_record(rng, 3, 16), d = random_record(rng, 3, 16);
  ShotRecord scaled = f;
  for (double& x : scaled.samples) x *= 2.5;
  const ResidualVector a = modified_residual(f, d, 0), b = modified_residual(scaled, d, 0);
  for (std::size_t k = 0; k < a.values.size(); ++k) EXPECT_NEAR(b.values[k], 2.5 * a.values[k], 1e-12);
}

TEST(ModifiedResidual, IndependentOfSourceWavelet) {
  // Same Green's functions seen through two different wavelets.
  std::mt19937 rng(6);
  const ShotRecord g = random_record(rng, 3, 12);
  const auto w1 = seisgn::testing::random_trace(rng, 5), w2 = seisgn::testing::random_trace(rng, 5);
  ShotRecord f(0, 3, 16, 1e-3), d(0, 3, 16, 1e-3);
  for (std::size_t j = 0; j < 3; ++j) {
    const auto a = convolve(g.trace(j), w1), b = convolve(g.trace(j), w2);
    std::copy(a.begin(), a.end(), f.trace(j).begin());
    std::copy(b.begin(), b.end(), d.trace(j).begin());
  }
  for (double x : modified_residual(f, d, 0).values) EXPECT_NEAR(x, 0.0, 1e-12);
}

TEST(ModifiedResidual, RejectsMismatchedRecords) {
  std::mt19937 rng(8);
  EXPECT_THROW(modified_residual(random_record(rng, 3, 16), random_record(rng, 2, 16), 0), ValidationError);
  EXPECT_THROW(modified_residual(random_record(rng, 3, 16), random_record(rng, 3, 15), 0), ValidationError);
  EXPECT_THROW(modified_residual(random_record(rng, 3, 16), random_record(rng, 3, 16), 3), ValidationError);
}

TEST(ResidualVector, IndexMap) {
  ResidualVector r{2, 3, 5, std::vector<double>(30)};
  EXPECT_EQ(r.index(1, 2, 4), 29u);
  EXPECT_EQ(r.index(0, 1, 0), 5u);
  EXPECT_EQ(r.segment(1, 0).data(), r.values.data() + 15);
}

TEST(PerturbationRule, StepSize) {
  const PerturbationRule rule;
  EXPECT_DOUBLE_EQ(rule.step(200.0), 2.0);
  EXPECT_DOUBLE_EQ(rule.step(50.0), 1.0);
  EXPECT_DOUBLE_EQ(rule.step(0.0), 1.0);
  EXPECT_THROW((PerturbationRule{0.0, 0.0}.validate()), ValidationError);
}

TEST(PerturbationStep, FallsBackToNegativeAtCap) {
  ToyProblem toy(2, 2, 3, {0.5}, {0.25, 1.75}, 40);
  toy.model.vp(1, 1) = 1000.0;
  JacobianProblem p = toy.problem();
  EXPECT_GT(perturbation_step(p, ParameterClass::Vp, 0), 0.0);
  EXPECT_LT(perturbation_step(p, ParameterClass::Vp, 3), 0.0);
  toy.model.vs(0, 0) = 0.0;
  toy.model.vp(0, 0) = 300.0;
  EXPECT_DOUBLE_EQ(perturbation_step(p, ParameterClass::Vs, 0), 1.0);
  // Vs at its cap pins Vp to the cap: no admissible direction.
  toy.model.vp(1, 0) = 1000.0;
  toy.model.vs(1, 0) = (1000.0 - 1.0) / std::sqrt(2.0);
  EXPECT_EQ(perturbation_step(p, ParameterClass::Vp, 1), 0.0);
}

TEST(StreamJacobian, PinnedCellGivesZeroColumn) {
  ToyProblem toy(2, 2, 3, {0.5}, {0.25, 1.75}, 40);
  toy.model.vp(1, 0) = 1000.0;
  toy.model.vs(1, 0) = (1000.0 - 1.0) / std::sqrt(2.0);
  const auto sens = shot_sensitivities(toy.problem(), ParameterClass::Vp, 0);
  EXPECT_EQ(sens[1].max_abs(), 0.0);
  EXPECT_GT(sens[0].max_abs(), 0.0);
}

TEST(StreamJacobian, BlocksArriveInOrderWithExpectedShape) {
  const ToyProblem toy(2, 2, 3, {0.5, 2.5}, {0.25, 1.25, 2.75}, 40);
  const auto blocks = collect_blocks(toy.problem(), ParameterClass::Vs);
  ASSERT_EQ(blocks.size(), 6u);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    EXPECT_EQ(blocks[b].shot, b / 3);
    EXPECT_EQ(blocks[b].receiver, b % 3);
    EXPECT_EQ(blocks[b].rows.rows(), 79);
    EXPECT_EQ(blocks[b].rows.cols(), 4);
    if (b % 3 == 0) EXPECT_EQ(blocks[b].rows.norm(), 0.0);  // reference receiver
  }
}

TEST(StreamJacobian, MatchesDirectConvolutionOfSensitivities) {
  const ToyProblem toy(2, 2, 3, {0.5}, {0.25, 1.25, 2.75}, 40);
  const JacobianProblem p = toy.problem();
  const auto sens = shot_sensitivities(p, ParameterClass::Vs, 0);
  const auto blocks = collect_blocks(p, ParameterClass::Vs);
  for (std::size_t j = 0; j < 3; ++j) {
    const double scale = j == 0 ? 1.0 : blocks[j].rows.cwiseAbs().maxCoeff();
    if (j > 0) ASSERT_GT(scale, 0.0);
    for (std::size_t q = 0; q < 4; ++q) {
      const auto a = convolve(sens[q].trace(j), toy.observed[0].trace(0));
      const auto b = convolve(toy.observed[0].trace(j), sens[q].trace(0));
      for (std::size_t t = 0; t < a.size(); ++t) {
        EXPECT_NEAR(blocks[j].rows(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(q)), a[t] - b[t],
                    1e-10 * scale);
      }
    }
  }
}

TEST(StreamJacobian, UnreachedCellGivesZeroColumn) {
  // Far corner cell of a wide grid; waves cannot reach it within 12 steps.
  const ToyProblem toy(6, 2, 3, {0.5}, {0.25, 1.25}, 12);
  const auto blocks = collect_blocks(toy.problem(), ParameterClass::Vs);
  for (const auto& b : blocks) EXPECT_EQ(b.rows.col(11).norm(), 0.0);
}

TEST(StreamJacobian, ForwardAndCentralAgree) {
  ToyProblem toy(2, 2, 3, {0.5}, {0.25, 1.25, 2.75}, 60);
  const auto fwd = collect_blocks(toy.problem(), ParameterClass::Vs);
  toy.rule.scheme = PerturbationRule::Scheme::Central;
  const auto ctr = collect_blocks(toy.problem(), ParameterClass::Vs);
  const Eigen::MatrixXd a = assemble_dense(fwd, 1, 3), b = assemble_dense(ctr, 1, 3);
  for (Eigen::Index q = 0; q < a.cols(); ++q) {
    EXPECT_LT((a.col(q) - b.col(q)).norm(), 0.05 * b.col(q).norm()) << "column " << q;
  }
}

TEST(StreamJacobian, DeepColumnsAreWeaker) {
  const ToyProblem toy(3, 4, 2, {0.5}, {0.25, 1.25, 2.75}, 120);
  const auto blocks = collect_blocks(toy.problem(), ParameterClass::Vs);
  const Eigen::MatrixXd j = assemble_dense(blocks, 1, 3);
  double top = 0.0, bottom = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i) {
    top += j.col(i).norm();
    bottom += j.col(9 + i).norm();
  }
  EXPECT_LT(bottom, top);
}

TEST(NormalEquations, SingleBlockIsExactProduct) {
  std::mt19937 rng(9);
  JacobianBlock b{0, 0, Eigen::MatrixXd::Random(7, 5)};
  NormalEquations ne(5);
  ne.add(b);
  const Eigen::MatrixXd h = ne.hessian();
  EXPECT_EQ(h, h.transpose());
  EXPECT_LT((h - b.rows.transpose() * b.rows).norm(), 1e-14 * h.norm());
  EXPECT_EQ(ne.blocks(), 1u);
  JacobianBlock wrong{0, 0, Eigen::MatrixXd::Random(7, 4)};
  EXPECT_THROW(ne.add(wrong), ValidationError);
}

TEST(NormalEquations, StreamedEqualsDenseAndIsPsd) {
  const ToyProblem toy(4, 2, 2, {0.25, 3.25}, {0.25, 1.75, 3.25}, 64);
  const ResidualVector r = toy.residual();
  const auto blocks = collect_blocks(toy.problem(), ParameterClass::Vs);
  const Eigen::MatrixXd h = accumulate_hessian(blocks);
  const Eigen::MatrixXd j = assemble_dense(blocks, 2, 3);
  const Eigen::MatrixXd dense = j.transpose() * j;
  EXPECT_LE((h - dense).cwiseAbs().maxCoeff(), 1e-12 * h.norm());
  EXPECT_EQ((h - h.transpose()).norm(), 0.0);
  const Eigen::Map<const Eigen::VectorXd> rv(r.values.data(), static_cast<Eigen::Index>(r.values.size()));
  const Eigen::VectorXd g = accumulate_gradient(blocks, r);
  EXPECT_LE((g - j.transpose() * rv).norm(), 1e-12 * g.norm());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8 * h.norm());
}

TEST(NormalEquations, InvariantToBlockPartitioning) {
  const ToyProblem toy(4, 2, 2, {0.25, 3.25}, {0.25, 1.75, 3.25}, 64);
  const auto blocks = collect_blocks(toy.problem(), ParameterClass::Vs);
  const Eigen::MatrixXd h = accumulate_hessian(blocks);
  NormalEquations per_shot(8);
  for (std::size_t s = 0; s < 2; ++s) {
    Eigen::MatrixXd stacked(3 * blocks[0].rows.rows(), 8);
    for (std::size_t j = 0; j < 3; ++j) stacked.middleRows(static_cast<Eigen::Index>(j) * blocks[0].rows.rows(),
                                                        blocks[0].rows.rows()) = blocks[s * 3 + j].rows;
    per_shot.add(JacobianBlock{s, 0, stacked});
  }
  EXPECT_LE((per_shot.hessian() - h).cwiseAbs().maxCoeff(), 1e-12 * h.norm());
}

TEST(NormalEquations, ZeroResidualGivesZeroGradient) {
  ToyProblem toy(2, 2, 3, {0.5}, {0.25, 1.25, 2.75}, 40);
  toy.observed = toy.baseline;
  const ResidualVector r = toy.residual();
  const Eigen::VectorXd g = accumulate_gradient(collect_blocks(toy.problem(), ParameterClass::Vp), r);
  for (Eigen::Index q = 0; q < g.size(); ++q) EXPECT_EQ(g[q], 0.0);
}

TEST(Gradient, MatchesFiniteDifferenceOfMisfit) {
  ToyProblem toy(2, 2, 4, {0.5, 3.5}, {0.25, 1.75, 3.75}, 80);
  toy.rule = PerturbationRule{1e-6, 0.0};
  const ResidualVector r = toy.residual();
  for (ParameterClass cls : {ParameterClass::Vs, ParameterClass::Vp}) {
    const Eigen::VectorXd g = accumulate_gradient(collect_blocks(toy.problem(), cls), r);
    Eigen::VectorXd fd(4);
    for (std::size_t p = 0; p < 4; ++p) {
      const double h = 1e-4 * toy.model.field(cls).values()[p];
      auto eval = [&](double delta) {
        ParameterizedModel m = toy.model;
        m.field(cls).values()[p] += delta;
        const auto rec = run_survey(m.fd_model(), toy.survey);
        return misfit(modified_residual(rec, toy.observed, 0));
      };
      fd[static_cast<Eigen::Index>(p)] = (eval(h) - eval(-h)) / (2.0 * h);
    }
    EXPECT_LT((g - fd).norm(), 1e-3 * fd.norm()) << to_string(cls) << "\n" << g.transpose() << "\n"
                                                  << fd.transpose();
  }
}
