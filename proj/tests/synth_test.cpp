#include <gtest/gtest.h>

#include <filesystem>
#include <vector>

#include "eegkit/bandpower.hpp"
#include "eegkit/coherence.hpp"
#include "eegkit/io.hpp"
#include "eegkit/synth.hpp"

namespace {

using namespace eegkit;
using namespace eegkit::synth;

TEST(MixSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t k = 0; k < 50; ++k) seen.insert(mix_seed(s, k));
  EXPECT_EQ(seen.size(), 200u);
  EXPECT_EQ(mix_seed(7, 3), mix_seed(7, 3));
}

TEST(BandSignal, ZeroPowersGiveZeros) {
  for (double v : gen_band_signal(std::vector<double>(5, 0.0), 250.0, 2.0, 1)) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(gen_band_signal(std::vector<double>(5, 0.0), 250.0, 0.5, 1), Error);
  EXPECT_THROW(gen_band_signal(std::vector<double>(4, 1.0), 250.0, 2.0, 1), Error);
  EXPECT_THROW(gen_band_signal(std::vector<double>{1, 1, -1, 1, 1}, 250.0, 2.0, 1), Error);
}

TEST(BandSignal, AlphaOnlyRoundTripsThroughPowerMatrix) {
  const double fs = 250.0;
  const auto x = gen_band_signal(std::vector<double>{0, 0, 100, 0, 0}, fs, 120.0, 5);
  const auto m = power_matrix(default_bands(), x, 5.0, 2.0, fs);
  const Eigen::VectorXd means = m.values.rowwise().mean();
  EXPECT_NEAR(means(2), 100.0, 10.0);
  for (Eigen::Index b : {0, 1, 3, 4}) EXPECT_LE(means(b), 5.0) << b;
}

TEST(BandSignal, DeterministicPerSeed) {
  const std::vector<double> p = {4, 3, 2, 1, 0.5};
  EXPECT_EQ(gen_band_signal(p, 250.0, 4.0, 9), gen_band_signal(p, 250.0, 4.0, 9));
  EXPECT_NE(gen_band_signal(p, 250.0, 4.0, 9), gen_band_signal(p, 250.0, 4.0, 10));
}

TEST(CoherentPair, Extremes) {
  const double fs = 250.0;
  const double duration = (500.0 + 63.0 * 250.0) / fs;  // 64 segments
  auto [u0, v0] = gen_coherent_pair(0.0, fs, duration, 3);
  const auto e0 = welch_spectra(u0, v0, fs);
  ASSERT_EQ(e0.segments, 64u);
  EXPECT_LE(integrated_coherence(msc(e0)), 0.05);
  auto [u1, v1] = gen_coherent_pair(1.0, fs, duration, 3);
  EXPECT_GE(integrated_coherence(msc(welch_spectra(u1, v1, fs))), 0.9);
  EXPECT_NEAR(integrated_coherence(msc(welch_spectra(u1, u1, fs))), 1.0, 1e-9);
  EXPECT_THROW(gen_coherent_pair(1.5, fs, duration, 3), Error);
}

TEST(Cohort, SizesLabelsAndStructure) {
  CohortSpec spec;
  spec.duration_s = 30.0;
  spec.baseline_s = 5.0;
  const auto cohort = gen_cohort(spec);
  ASSERT_EQ(cohort.size(), 17u);
  int asd = 0, td = 0;
  for (const auto& r : cohort) {
    (r.diagnosis == Diagnosis::ASD ? asd : td)++;
    EXPECT_EQ(r.labels, ElectrodeSet::homan().names);
    EXPECT_EQ(r.samples(), 7500u);
    ASSERT_TRUE(r.ados2_score);
    EXPECT_GE(*r.ados2_score, 0);
    EXPECT_LE(*r.ados2_score, 22);
    ASSERT_EQ(r.epochs.size(), 2u);
    EXPECT_EQ(r.epochs[0].name, "BASELINE");
    EXPECT_EQ(r.epochs[1].end, 7500u);
    EXPECT_TRUE(validate(r).empty());
  }
  EXPECT_EQ(asd, 8);
  EXPECT_EQ(td, 9);
  EXPECT_EQ(cohort[0].subject_id, "sub-01");
  EXPECT_EQ(cohort[16].subject_id, "sub-17");
}

TEST(Cohort, SpecValidation) {
  CohortSpec spec;
  spec.n_asd = spec.n_td = 0;
  EXPECT_THROW(gen_cohort(spec), Error);
  spec = {};
  spec.asd.band_multipliers = {1.0, 0.0, 1.0, 1.0, 1.0};
  EXPECT_THROW(gen_cohort(spec), Error);
  spec = {};
  spec.td.right_lambda = 1.2;
  EXPECT_THROW(gen_cohort(spec), Error);
  spec = {};
  spec.base_powers.pop_back();
  EXPECT_THROW(gen_cohort(spec), Error);
}

TEST(Cohort, AsdScoresInObservedRange) {
  const CohortSpec spec;
  for (std::size_t i = 0; i < spec.n_asd; ++i) {
    const auto d = draw_subject(spec, i);
    EXPECT_EQ(d.diagnosis, Diagnosis::ASD);
    EXPECT_GE(d.ados2, 7) << i;
    EXPECT_LE(d.ados2, 20) << i;
  }
}

TEST(Cohort, AsdScoresRarelyLeaveObservedRangeAcrossSeeds) {
  // Score noise is Gaussian, so an occasional tail draw lands outside; the rate must stay small.
  std::size_t total = 0, inside = 0;
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    CohortSpec spec;
    spec.seed = seed;
    for (std::size_t i = 0; i < spec.n_asd; ++i, ++total) {
      const int s = draw_subject(spec, i).ados2;
      inside += s >= 7 && s <= 20;
    }
  }
  EXPECT_GE(static_cast<double>(inside) / static_cast<double>(total), 0.99);
}

TEST(Cohort, ScoresAntiCorrelateWithRightLambda) {
  CohortSpec spec;
  spec.n_asd = 40;
  spec.n_td = 40;
  std::vector<double> lam, score;
  for (std::size_t i = 0; i < 80; ++i) {
    const auto d = draw_subject(spec, i);
    lam.push_back(d.right_lambda);
    score.push_back(d.ados2);
  }
  const auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); };
  const double ml = mean(lam), ms = mean(score);
  double cov = 0, vl = 0, vs = 0;
  for (std::size_t i = 0; i < 80; ++i) {
    cov += (lam[i] - ml) * (score[i] - ms);
    vl += (lam[i] - ml) * (lam[i] - ml);
    vs += (score[i] - ms) * (score[i] - ms);
  }
  EXPECT_LT(cov / std::sqrt(vl * vs), -0.8);
}

TEST(Cohort, LambdaGapShowsInRightHemisphereCoherence) {
  CohortSpec spec;
  spec.duration_s = 60.0;
  spec.baseline_s = 0.0;
  spec.asd.right_lambda = 0.2;
  spec.td.right_lambda = 0.8;
  double asd = 0.0, td = 0.0;
  for (const auto& r : gen_cohort(spec)) {
    const double m = hemispheric_scores(r).right_mean;
    (r.diagnosis == Diagnosis::ASD ? asd : td) += m;
  }
  EXPECT_GE(td / 9.0 - asd / 8.0, 0.3);
}

TEST(Cohort, ByteIdenticalRegeneration) {
  CohortSpec spec;
  spec.n_asd = 2;
  spec.n_td = 2;
  spec.duration_s = 10.0;
  spec.baseline_s = 2.0;
  const auto dir = std::filesystem::temp_directory_path() / "eegkit_synth_test";
  std::filesystem::remove_all(dir);
  const auto a = write_cohort(gen_cohort(spec), dir / "a");
  const auto b = write_cohort(gen_cohort(spec), dir / "b");
  spec.seed = 2;
  const auto c = write_cohort(gen_cohort(spec), dir / "c");
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto csv = [](std::filesystem::path p) { return io::read_file(p.replace_extension(".csv")); };
    EXPECT_EQ(io::read_file(a[i]), io::read_file(b[i]));
    EXPECT_EQ(csv(a[i]), csv(b[i]));
    EXPECT_NE(csv(a[i]), csv(c[i]));
    const auto back = load_recording(a[i]);
    EXPECT_EQ(back.data, gen_cohort({.n_asd = 2, .n_td = 2, .duration_s = 10.0, .baseline_s = 2.0})[i].data);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
