#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "eegdecode/connectivity.hpp"
#include "eegdecode/error.hpp"
#include "eegdecode/fft.hpp"
#include "eegdecode/preprocess.hpp"
#include "eegdecode/rng.hpp"
#include "eegdecode/synth.hpp"
#include "json_util.hpp"

namespace eegdecode {

namespace {

using Index = Eigen::Index;
constexpr Index kBurnIn = 1000;
constexpr double kPinkFloorHz = 0.5;
constexpr const char* kBaselineLabel = "rest";

Eigen::VectorXd unit_rms(Eigen::VectorXd v) {
  const double rms = std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
  if (rms > 0.0) v /= rms;
  return v;
}

// 1/f power spectrum (amplitude 1/sqrt(f)), flattened below 0.5 Hz, zero mean, unit RMS.
Eigen::VectorXd pink_noise(Index n, double fs, Rng& rng) {
  const auto nfft = next_pow2(static_cast<std::size_t>(n));
  std::vector<double> white(nfft);
  for (auto& w : white) w = standard_normal(rng);
  auto spec = rfft(white, nfft);
  spec[0] = 0.0;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(nfft);
    spec[k] /= std::sqrt(std::max(f, kPinkFloorHz));
  }
  const auto pink = irfft(spec, nfft);
  return unit_rms(Eigen::Map<const Eigen::VectorXd>(pink.data(), n));
}

double transition_width(const FrequencyBand& band) {
  return std::min({2.0, band.lo, (band.hi - band.lo) / 2.0});
}

FrequencyBand lookup_band(const std::string& name) {
  try {
    return canonical_band(name);
  } catch (const std::exception&) {
    throw ConfigError("synth: unknown band '" + name + "'");
  }
}

struct Segment {
  std::string condition;
  std::string task;
  Index begin = 0;
  Index end = 0;
};

bool effect_applies(const PlantedEffect& e, const Segment& s) {
  return s.condition == e.condition && (e.task.empty() || e.task == s.task);
}

std::vector<Eigen::MatrixXd> link_coefficients(double coupling, double radius, double f0, double fs) {
  const double a1 = 2.0 * radius * std::cos(2.0 * std::numbers::pi * f0 / fs);
  const double a2 = -radius * radius;
  Eigen::MatrixXd lag1 = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd lag2 = Eigen::MatrixXd::Zero(2, 2);
  lag1(0, 0) = lag1(1, 1) = a1;
  lag2(0, 0) = lag2(1, 1) = a2;
  lag2(1, 0) = coupling;  // sink (1) driven by source (0) two samples back
  return {lag1, lag2};
}

double segment_rms(const Eigen::VectorXd& v) { return std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

}  // namespace

Eigen::MatrixXd gen_var_process(const std::vector<Eigen::MatrixXd>& coefficients, const Eigen::MatrixXd& sigma,
                                Index n, std::uint64_t seed) {
  const Index m = sigma.rows();
  if (sigma.cols() != m || m < 1) throw ConfigError("VAR generator: sigma must be square");
  for (const auto& a : coefficients) {
    if (a.rows() != m || a.cols() != m) throw ConfigError("VAR generator: coefficient shape mismatch");
  }
  if (n < 1) throw ConfigError("VAR generator: n must be >= 1");
  if (!coefficients.empty()) {
    const double radius = companion_spectral_radius(coefficients);
    if (!(radius < 1.0)) {
      throw ConfigError("VAR generator: unstable coefficients (spectral radius " + std::to_string(radius) + ")");
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success || !sigma.isApprox(sigma.transpose())) {
    throw ConfigError("VAR generator: sigma is not symmetric positive definite");
  }
  const Eigen::MatrixXd chol = llt.matrixL();
  const auto p = static_cast<Index>(coefficients.size());
  const Index total = n + kBurnIn;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(total, m);
  Rng rng(seed);
  Eigen::VectorXd z(m);
  for (Index t = 0; t < total; ++t) {
    for (Index i = 0; i < m; ++i) z[i] = standard_normal(rng);
    Eigen::VectorXd v = chol * z;
    for (Index r = 1; r <= p && r <= t; ++r) v.noalias() += coefficients[static_cast<std::size_t>(r - 1)] * x.row(t - r).transpose();
    x.row(t) = v.transpose();
  }
  return x.bottomRows(n);
}

std::vector<double> gen_oscillation(const FrequencyBand& band, double amplitude, double duration_s, double fs,
                                    std::uint64_t seed) {
  if (!(fs > 0.0)) throw ConfigError("oscillation: fs must be positive");
  if (!(band.lo > 0.0 && band.hi > band.lo && band.hi < fs / 2.0)) {
    throw ConfigError("oscillation: band must lie inside (0, fs/2)");
  }
  if (!(amplitude >= 0.0)) throw ConfigError("oscillation: amplitude must be >= 0");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  if (n < 2) throw ConfigError("oscillation: duration too short");
  if (amplitude == 0.0) return std::vector<double>(n, 0.0);
  const double tbw = std::min(1.0, transition_width(band));
  const auto kernel = design_bandpass_fir(band.lo, band.hi, fs, tbw);
  Rng rng(seed);
  std::vector<double> white(n);
  for (auto& w : white) w = standard_normal(rng);
  auto out = filter_zero_phase(white, kernel);
  double ss = 0.0;
  for (double v : out) ss += v * v;
  const double scale = amplitude / std::sqrt(ss / static_cast<double>(n));
  for (auto& v : out) v *= scale;
  return out;
}

void SynthSpec::validate() const {
  if (!seed) throw ConfigError("synth spec: 'seed' is mandatory");
  if (n_subjects < 1) throw ConfigError("synth spec: n_subjects must be >= 1");
  if (!(fs > 0.0)) throw ConfigError("synth spec: fs must be positive");
  if (conditions.size() < 1) throw ConfigError("synth spec: need at least one condition");
  std::set<std::string> seen;
  for (const auto& c : conditions) {
    if (c.empty() || c == kBaselineLabel || c.find('/') != std::string::npos || !seen.insert(c).second) {
      throw ConfigError("synth spec: invalid or duplicate condition name '" + c + "'");
    }
  }
  if (tasks.empty()) throw ConfigError("synth spec: need at least one task");
  seen.clear();
  for (const auto& t : tasks) {
    if (t.name.empty() || t.name.find('/') != std::string::npos || !seen.insert(t.name).second) {
      throw ConfigError("synth spec: invalid or duplicate task name '" + t.name + "'");
    }
    if (!(t.duration_s > 0.0)) throw ConfigError("synth spec: task '" + t.name + "' needs a positive duration");
  }
  if (!(baseline_s > 0.0)) throw ConfigError("synth spec: baseline_s must be positive");
  if (!(jitter_sd >= 0.0)) throw ConfigError("synth spec: jitter_sd must be >= 0");
  if (!(noise_rms_v > 0.0)) throw ConfigError("synth spec: noise_rms_v must be positive");
  if (latent_sources < 0) throw ConfigError("synth spec: latent_sources must be >= 0");
  if (!(independent_fraction >= 0.0 && independent_fraction <= 1.0)) {
    throw ConfigError("synth spec: independent_fraction must lie in [0, 1]");
  }
  if (latent_sources == 0 && independent_fraction < 1.0) {
    throw ConfigError("synth spec: latent_sources = 0 requires independent_fraction = 1");
  }
  if (!(link_rms_ratio > 0.0)) throw ConfigError("synth spec: link_rms_ratio must be positive");
  if (!(link_base_pdc > 0.0 && link_base_pdc < 1.0)) throw ConfigError("synth spec: link_base_pdc must lie in (0, 1)");
  if (!(link_radius > 0.0 && link_radius < 1.0)) throw ConfigError("synth spec: link_radius must lie in (0, 1)");
  if (!(blink_rate_hz >= 0.0)) throw ConfigError("synth spec: blink_rate_hz must be >= 0");
  for (const auto& e : effects) {
    if (!(e.effect > -1.0)) throw ConfigError("synth spec: effect sizes must be > -1");
    if (std::find(conditions.begin(), conditions.end(), e.condition) == conditions.end()) {
      throw ConfigError("synth spec: effect targets unknown condition '" + e.condition + "'");
    }
    if (!e.task.empty() && std::none_of(tasks.begin(), tasks.end(), [&](const SynthTask& t) { return t.name == e.task; })) {
      throw ConfigError("synth spec: effect targets unknown task '" + e.task + "'");
    }
    const auto band = lookup_band(e.band);
    if (!(band.hi < fs / 2.0)) throw ConfigError("synth spec: band '" + e.band + "' exceeds Nyquist");
    if (e.kind == EffectKind::BandPower && e.channels.empty()) {
      throw ConfigError("synth spec: band-power effect needs target channels");
    }
    if (e.kind == EffectKind::PdcLink && (e.channels.size() != 2 || e.channels[0] == e.channels[1])) {
      throw ConfigError("synth spec: pdc_link effect needs two distinct channels {source, sink}");
    }
  }
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  detail::StrictObject o(j, "synth spec");
  int version = 0;
  o.optional("format_version", version);
  if (version != 1) throw ConfigError("synth spec: format_version must be 1");
  SynthSpec s;
  o.optional("n_subjects", s.n_subjects);
  o.optional("fs", s.fs);
  o.optional("montage", s.montage);
  o.optional("channels", s.channels);
  o.optional("conditions", s.conditions);
  if (o.has("tasks")) {
    s.tasks.clear();
    for (const auto& t : o.at("tasks")) {
      detail::StrictObject to(t, "synth spec.tasks[]");
      s.tasks.push_back({to.required<std::string>("name"), to.required<double>("duration_s")});
      to.finish();
    }
  }
  o.optional("baseline_s", s.baseline_s);
  if (o.has("effects")) {
    for (const auto& e : o.at("effects")) {
      detail::StrictObject eo(e, "synth spec.effects[]");
      PlantedEffect pe;
      const auto kind = eo.required<std::string>("kind");
      if (kind == "bandpower") pe.kind = EffectKind::BandPower;
      else if (kind == "pdc_link") pe.kind = EffectKind::PdcLink;
      else throw ConfigError("synth spec: unknown effect kind '" + kind + "'");
      pe.channels = eo.required<std::vector<std::string>>("channels");
      pe.band = eo.required<std::string>("band");
      pe.effect = eo.required<double>("effect");
      pe.condition = eo.required<std::string>("condition");
      eo.optional("task", pe.task);
      eo.finish();
      s.effects.push_back(std::move(pe));
    }
  }
  o.optional("jitter_sd", s.jitter_sd);
  o.optional("noise_rms_v", s.noise_rms_v);
  o.optional("latent_sources", s.latent_sources);
  o.optional("independent_fraction", s.independent_fraction);
  o.optional("link_rms_ratio", s.link_rms_ratio);
  o.optional("link_base_pdc", s.link_base_pdc);
  o.optional("link_radius", s.link_radius);
  o.optional("eog", s.eog);
  o.optional("blink_rate_hz", s.blink_rate_hz);
  if (o.has("seed")) s.seed = o.required<std::uint64_t>("seed");
  o.finish();
  s.validate();
  return s;
}

nlohmann::json to_json(const SynthSpec& s) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : s.tasks) tasks.push_back({{"name", t.name}, {"duration_s", t.duration_s}});
  nlohmann::json effects = nlohmann::json::array();
  for (const auto& e : s.effects) {
    nlohmann::json je = {{"kind", e.kind == EffectKind::BandPower ? "bandpower" : "pdc_link"},
                         {"channels", e.channels},
                         {"band", e.band},
                         {"effect", e.effect},
                         {"condition", e.condition}};
    if (!e.task.empty()) je["task"] = e.task;
    effects.push_back(std::move(je));
  }
  nlohmann::json j = {{"format_version", 1},
                      {"n_subjects", s.n_subjects},
                      {"fs", s.fs},
                      {"montage", s.montage},
                      {"channels", s.channels},
                      {"conditions", s.conditions},
                      {"tasks", tasks},
                      {"baseline_s", s.baseline_s},
                      {"effects", effects},
                      {"jitter_sd", s.jitter_sd},
                      {"noise_rms_v", s.noise_rms_v},
                      {"latent_sources", s.latent_sources},
                      {"independent_fraction", s.independent_fraction},
                      {"link_rms_ratio", s.link_rms_ratio},
                      {"link_base_pdc", s.link_base_pdc},
                      {"link_radius", s.link_radius},
                      {"eog", s.eog},
                      {"blink_rate_hz", s.blink_rate_hz}};
  if (s.seed) j["seed"] = *s.seed;
  return j;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open synth spec " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("synth spec " + path.string() + ": " + e.what());
  }
  return synth_spec_from_json(j);
}

double analytic_link_pdc(double coupling, double radius, const FrequencyBand& band, double fs, int grid_points) {
  const auto coefs = link_coefficients(coupling, radius, 0.5 * (band.lo + band.hi), fs);
  MvarModel model;
  model.order = 2;
  model.coefficients = coefs;
  model.noise_cov = Eigen::MatrixXd::Identity(2, 2);
  model.fs = fs;
  model.spectral_radius = companion_spectral_radius(coefs);
  model.stable = model.spectral_radius < 1.0;
  const auto tensor = pdc(model, uniform_grid(band.lo, band.hi, grid_points));
  double sum = 0.0;
  for (std::size_t f = 0; f < tensor.freqs.size(); ++f) sum += tensor.at(1, 0, f);
  return sum / static_cast<double>(tensor.freqs.size());
}

double solve_link_coupling(double target_pdc, double radius, const FrequencyBand& band, double fs) {
  if (!(target_pdc < 1.0)) throw ConfigError("link coupling: target PDC must be < 1");
  if (target_pdc <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1e-3;
  for (int i = 0; analytic_link_pdc(hi, radius, band, fs) < target_pdc; ++i) {
    if (i > 80) throw ConfigError("link coupling: target PDC is not reachable");
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (analytic_link_pdc(mid, radius, band, fs) < target_pdc ? lo : hi) = mid;
  }
  return hi;
}

std::string synth_subject_id(const SynthSpec& spec, int index) {
  const int width = spec.n_subjects >= 100 ? 3 : 2;
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%0*d", width, index + 1);
  return buf;
}

Recording gen_subject(const SynthSpec& spec, int index, SubjectTruth* truth) {
  spec.validate();
  if (index < 0 || index >= spec.n_subjects) throw ConfigError("synth: subject index out of range");
  const Montage montage = standard_montage(spec.montage);
  const std::vector<std::string> names = spec.channels.empty() ? montage.channel_names : spec.channels;
  std::vector<Eigen::Vector3d> pos;
  for (const auto& n : names) {
    if (!montage.index_of(n)) throw DataError("synth: channel '" + n + "' is not in montage '" + montage.name + "'");
    pos.push_back(montage.position(n));
  }
  const auto channel_col = [&](const std::string& n) -> Index {
    const auto it = std::find(names.begin(), names.end(), n);
    if (it == names.end()) throw DataError("synth: effect channel '" + n + "' is not among the generated channels");
    return it - names.begin();
  };
  for (const auto& e : spec.effects) {
    for (const auto& c : e.channels) channel_col(c);
  }

  const std::uint64_t seed = *spec.seed;
  Rng rng = make_rng(seed, "subject", static_cast<std::uint64_t>(index));
  const double fs = spec.fs;

  SubjectTruth st;
  st.subject = synth_subject_id(spec, index);
  st.condition_order = spec.conditions;
  shuffle_in_place(st.condition_order, rng);
  st.gain = std::exp(spec.jitter_sd * standard_normal(rng));
  // Own stream per effect, so adding an effect leaves the background untouched.
  for (std::size_t ei = 0; ei < spec.effects.size(); ++ei) {
    Rng jitter = make_rng(seed, "jitter:" + st.subject, ei);
    const double jittered = spec.effects[ei].effect * std::exp(spec.jitter_sd * standard_normal(jitter));
    st.effect_sizes.push_back(std::max(jittered, -0.99));
  }

  Recording rec;
  rec.fs = fs;
  rec.subject_id = st.subject;
  std::vector<Segment> segments;
  double t = spec.baseline_s;
  rec.annotations.push_back({0.0, spec.baseline_s, kBaselineLabel});
  segments.push_back({kBaselineLabel, "", 0, std::llround(spec.baseline_s * fs)});
  for (const auto& c : st.condition_order) {
    for (const auto& task : spec.tasks) {
      const double end = t + task.duration_s;
      rec.annotations.push_back({t, end, c + "/" + task.name});
      segments.push_back({c, task.name, std::llround(t * fs), std::llround(end * fs)});
      t = end;
    }
  }
  const Index n = std::llround(t * fs);
  const auto m = static_cast<Index>(names.size());

  // Background: spatially smooth latent pink sources plus independent pink noise.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, m);
  const double shared_w = std::sqrt(1.0 - spec.independent_fraction);
  const double indep_w = std::sqrt(spec.independent_fraction);
  if (spec.latent_sources > 0 && shared_w > 0.0) {
    constexpr double kPatternWidth = 0.6;  // radians
    Eigen::MatrixXd mixed = Eigen::MatrixXd::Zero(n, m);
    boost::random::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
    for (int k = 0; k < spec.latent_sources; ++k) {
      const Eigen::Vector3d centre = pos[pick(rng)];
      const Eigen::VectorXd src = pink_noise(n, fs, rng);
      for (Index c = 0; c < m; ++c) {
        const double ang = std::acos(std::clamp(centre.dot(pos[static_cast<std::size_t>(c)]), -1.0, 1.0));
        mixed.col(c) += std::exp(-ang * ang / (2.0 * kPatternWidth * kPatternWidth)) * src;
      }
    }
    for (Index c = 0; c < m; ++c) x.col(c) = shared_w * unit_rms(mixed.col(c));
  }
  if (indep_w > 0.0) {
    for (Index c = 0; c < m; ++c) x.col(c) += indep_w * pink_noise(n, fs, rng);
  }
  x *= spec.noise_rms_v;

  // Directed links. Each end is spread over its neighbours like a cortical
  // source, so the target electrodes stay predictable from the montage.
  const auto link_pattern = [&](Index c, Index centre) {
    constexpr double kLinkPatternWidth = 0.35;  // radians
    const double ang = std::acos(std::clamp(pos[static_cast<std::size_t>(centre)].dot(pos[static_cast<std::size_t>(c)]), -1.0, 1.0));
    return std::exp(-ang * ang / (2.0 * kLinkPatternWidth * kLinkPatternWidth));
  };
  st.base_pdc.assign(spec.effects.size(), std::numeric_limits<double>::quiet_NaN());
  st.target_pdc = st.base_pdc;
  for (std::size_t ei = 0; ei < spec.effects.size(); ++ei) {
    const auto& e = spec.effects[ei];
    if (e.kind != EffectKind::PdcLink) continue;
    const auto band = lookup_band(e.band);
    const double f0 = 0.5 * (band.lo + band.hi);
    const double base_coupling = solve_link_coupling(spec.link_base_pdc, spec.link_radius, band, fs);
    const double base = analytic_link_pdc(base_coupling, spec.link_radius, band, fs);
    const double target_coupling = solve_link_coupling((1.0 + st.effect_sizes[ei]) * base, spec.link_radius, band, fs);
    st.base_pdc[ei] = base;
    st.target_pdc[ei] = analytic_link_pdc(target_coupling, spec.link_radius, band, fs);
    const Index src = channel_col(e.channels[0]);
    const Index sink = channel_col(e.channels[1]);
    double scale = 0.0;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const auto& seg = segments[s];
      const double coupling = effect_applies(e, seg) ? target_coupling : base_coupling;
      const auto sim = gen_var_process(link_coefficients(coupling, spec.link_radius, f0, fs),
                                       Eigen::MatrixXd::Identity(2, 2), seg.end - seg.begin,
                                       derive_seed(seed, "link:" + st.subject + ":" + std::to_string(ei), s));
      if (s == 0) scale = spec.link_rms_ratio * spec.noise_rms_v / segment_rms(sim.col(0));
      for (Index c = 0; c < m; ++c) {
        const double w_src = link_pattern(c, src);
        const double w_sink = link_pattern(c, sink);
        if (w_src + w_sink < 1e-6) continue;
        x.block(seg.begin, c, seg.end - seg.begin, 1) += scale * (w_src * sim.col(0) + w_sink * sim.col(1));
      }
    }
  }

  // Band-power changes inside the target segments.
  for (std::size_t ei = 0; ei < spec.effects.size(); ++ei) {
    const auto& e = spec.effects[ei];
    if (e.kind != EffectKind::BandPower) continue;
    const auto band = lookup_band(e.band);
    const auto kernel = design_bandpass_fir(band.lo, band.hi, fs, transition_width(band));
    const double gain = std::sqrt(1.0 + st.effect_sizes[ei]) - 1.0;
    for (const auto& ch : e.channels) {
      const Index c = channel_col(ch);
      const Eigen::VectorXd col = x.col(c);
      const auto narrow = filter_zero_phase(std::span<const double>(col.data(), static_cast<std::size_t>(n)), kernel);
      for (const auto& seg : segments) {
        if (!effect_applies(e, seg)) continue;
        for (Index i = seg.begin; i < seg.end; ++i) x(i, c) += gain * narrow[static_cast<std::size_t>(i)];
      }
    }
  }

  x *= st.gain;
  rec.channel_names = names;
  rec.channel_roles.assign(names.size(), ChannelRole::Scalp);

  if (spec.eog) {
    // Blinks: raised-cosine bumps (0.3 s, ~100 uV) at Poisson times on VEOG.
    Eigen::VectorXd blinks = Eigen::VectorXd::Zero(n);
    if (spec.blink_rate_hz > 0.0) {
      boost::random::exponential_distribution<double> gap(spec.blink_rate_hz);
      boost::random::uniform_real_distribution<double> amp(80e-6, 120e-6);
      const auto width = static_cast<Index>(0.3 * fs);
      for (double at = gap(rng); at * fs < static_cast<double>(n); at += gap(rng)) {
        const auto start = static_cast<Index>(at * fs);
        const double a = amp(rng);
        for (Index i = 0; i < width && start + i < n; ++i) {
          blinks[start + i] += a * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(width)));
        }
      }
    }
    const Eigen::VectorXd veog = blinks + spec.noise_rms_v * pink_noise(n, fs, rng);
    const Eigen::VectorXd heog = 0.1 * blinks + spec.noise_rms_v * pink_noise(n, fs, rng);
    for (Index c = 0; c < m; ++c) {
      const auto& p = pos[static_cast<std::size_t>(c)];
      const double front = std::max(0.0, p.y());
      // Only the ocular source propagates; the EOG electrodes' own noise stays local.
      x.col(c) += (0.6 * front * front + 0.02 * p.x() * front) * blinks;
    }
    x.conservativeResize(n, m + 2);
    x.col(m) = veog;
    x.col(m + 1) = heog;
    rec.channel_names.push_back("VEOG");
    rec.channel_names.push_back("HEOG");
    rec.channel_roles.push_back(ChannelRole::Eog);
    rec.channel_roles.push_back(ChannelRole::Eog);
  }

  // Quantized to the on-disk precision so written and in-memory studies agree.
  rec.samples = x.cast<float>().cast<double>();
  validate(rec);
  if (truth) *truth = std::move(st);
  return rec;
}

SynthStudy gen_study(const SynthSpec& spec) {
  spec.validate();
  SynthStudy study;
  for (int i = 0; i < spec.n_subjects; ++i) {
    SubjectTruth st;
    study.recordings.push_back(gen_subject(spec, i, &st));
    study.truths.push_back(std::move(st));
  }
  study.ground_truth = ground_truth_manifest(spec, study.truths);
  return study;
}

nlohmann::json ground_truth_manifest(const SynthSpec& spec, const std::vector<SubjectTruth>& truths) {
  nlohmann::json effects = nlohmann::json::array();
  for (const auto& e : spec.effects) {
    nlohmann::json features = nlohmann::json::array();
    if (e.kind == EffectKind::BandPower) {
      for (const auto& c : e.channels) features.push_back(FeatureDescriptor{FeatureKind::BandPower, c, "", e.band}.to_string());
    } else {
      features.push_back(FeatureDescriptor{FeatureKind::Pdc, e.channels[0], e.channels[1], e.band}.to_string());
    }
    effects.push_back({{"kind", e.kind == EffectKind::BandPower ? "bandpower" : "pdc_link"},
                       {"features", features},
                       {"condition", e.condition},
                       {"task", e.task},
                       {"effect", e.effect},
                       {"expected_sign", e.effect > 0.0 ? 1 : (e.effect < 0.0 ? -1 : 0)}});
  }
  nlohmann::json subjects = nlohmann::json::array();
  for (const auto& t : truths) {
    nlohmann::json js = {{"subject", t.subject},
                         {"gain", t.gain},
                         {"condition_order", t.condition_order},
                         {"effect_sizes", t.effect_sizes}};
    nlohmann::json links = nlohmann::json::array();
    for (std::size_t i = 0; i < t.base_pdc.size(); ++i) {
      if (std::isnan(t.base_pdc[i])) continue;
      links.push_back({{"effect_index", i}, {"base_pdc", t.base_pdc[i]}, {"target_pdc", t.target_pdc[i]}});
    }
    js["links"] = links;
    subjects.push_back(std::move(js));
  }
  return {{"format_version", 1},
          {"baseline_label", kBaselineLabel},
          {"spec", to_json(spec)},
          {"effects", effects},
          {"subjects", subjects}};
}

void write_study(const SynthStudy& study, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& r : study.recordings) save_recording(r, dir);
  std::ofstream out(dir / "ground_truth.json");
  if (!out) throw DataError("cannot write " + (dir / "ground_truth.json").string());
  out << study.ground_truth.dump(2) << '\n';
}

}  // namespace eegdecode
