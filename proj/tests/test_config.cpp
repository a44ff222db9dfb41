#include <bptem/config.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace bptem;

TEST(Config, EmptyTextGivesDefaults) {
  auto c = parse_config(std::string());
  EXPECT_EQ(c.signal.f0, 50.0);
  EXPECT_EQ(c.tem.delta, 1.0 / 120.0);
  EXPECT_EQ(c.tem.b, 3.0);
  EXPECT_EQ(c.tem.c, 2.0);
  EXPECT_EQ(c.window.t_start, -4.0);
  EXPECT_EQ(c.decoder.kind, DecoderKind::closed_form);
  EXPECT_FALSE(c.decoder.gain.has_value());
  EXPECT_EQ(c.freq_sweep.deltas.size(), 3u);
  EXPECT_EQ(c.quant_sweep.bits, (std::vector<int>{2, 4, 6, 8, 12, 52}));
  EXPECT_EQ(c.run.base_seed, 1u);
}

TEST(Config, ParsesFractionsListsAndFlags) {
  auto c = parse_config(
      "[tem]\ndelta = 1/240\n[decoder]\nkind = apocs\ngain = doubled\nmax_iter = 100\n"
      "[noise_sweep]\nsnr_list = 5, inf\nkinds = white\n[run]\nfull = yes\nbase_seed = 123\nthreads = 2\n");
  EXPECT_EQ(c.tem.delta, 1.0 / 240.0);
  EXPECT_EQ(c.decoder.kind, DecoderKind::apocs);
  EXPECT_EQ(c.decoder.gain, GainConvention::doubled);
  EXPECT_EQ(c.decoder.iter.max_iter, 100);
  EXPECT_EQ(c.noise_sweep.snr_list[1], std::numeric_limits<double>::infinity());
  EXPECT_EQ(c.noise_sweep.kinds, (std::vector<std::string>{"white"}));
  EXPECT_TRUE(c.run.full);
  EXPECT_EQ(c.run.base_seed, 123u);
  EXPECT_EQ(c.run.threads, 2u);
}

TEST(Config, RejectsInvalidInput) {
  const char* bad[] = {
      "[signal]\nf0 = abc\n",
      "[signal]\nfoo = 1\n",
      "[nosuch]\nx = 1\n",
      "[tem]\nb = 2\nc = 2\n",
      "[tem]\ndelta = -1\n",
      "[signal]\nf0 = 10\n",
      "[window]\nt_end = -5\n",
      "[decoder]\nkind = magic\n",
      "[decoder]\nmax_iter = 0\n",
      "[decoder]\nmax_iter = 2.5\n",
      "[freq_sweep]\nf0_step = 0\n",
      "[freq_sweep]\ndeltas =\n",
      "[noise_sweep]\nkinds = pink\n",
      "[noise_sweep]\ntrials = 0\n",
      "[quant_sweep]\nbits = 0\n",
      "[baseline]\nrates = 65, -1\n",
      "[run]\nthreads = 0\n",
      "[run]\nfull = maybe\n",
      "[run]\nbase_seed = -3\n",
      "[tem]\ndelta = 1/0\n",
  };
  for (const char* text : bad) EXPECT_THROW(parse_config(std::string(text)), ConfigError) << text;
}

TEST(Config, WriteThenParseRoundTrips) {
  auto c = parse_config(std::string("[tem]\ndelta = 1/360\n[freq_sweep]\nf0_list = 15, 100.5\n[decoder]\ngain = unit\n"));
  std::ostringstream os;
  write_config(os, c);
  auto d = parse_config(os.str());
  std::ostringstream os2;
  write_config(os2, d);
  EXPECT_EQ(os.str(), os2.str());
  EXPECT_EQ(d.tem.delta, 1.0 / 360.0);
  EXPECT_EQ(d.freq_sweep.f0_list, (std::vector<double>{15.0, 100.5}));
  EXPECT_EQ(d.decoder.gain, GainConvention::unit);
}

TEST(Config, ValidateCatchesProgrammaticErrors) {
  ExperimentConfig c;
  EXPECT_NO_THROW(validate(c));
  c.decoder.trim = 1.5;
  EXPECT_THROW(validate(c), ConfigError);
}
