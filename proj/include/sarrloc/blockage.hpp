#pragma once
// Blockage detection from an RSSI time series.
//
// A passing obstacle produces a transient dip: the received power ramps
// down, sits at a reduced level, and ramps back up. Detection slides a
// piecewise-linear dip template over the trace, computes the zero-mean
// normalized correlation at every alignment, keeps in-window correlation
// peaks above a threshold, and resolves overlapping detections from a bank
// of templates by picking the best-correlated candidate per event.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sarrloc {

/// Uniformly sampled received-power series.
struct RssiTrace {
    std::vector<double> samples_dbm;
    double sample_interval_s{0.0};
    double start_time_s{0.0};

    RssiTrace() = default;
    RssiTrace(std::vector<double> samples, double interval_s, double start_s = 0.0)
        : samples_dbm(std::move(samples)), sample_interval_s(interval_s), start_time_s(start_s) {
        validate();
    }

    void validate() const {
        if (samples_dbm.size() < 2)
            throw std::invalid_argument("RssiTrace: need at least 2 samples");
        if (!(std::isfinite(sample_interval_s) && sample_interval_s > 0.0))
            throw std::invalid_argument("RssiTrace: sample interval must be > 0");
        if (!std::isfinite(start_time_s))
            throw std::invalid_argument("RssiTrace: non-finite start time");
        for (double v : samples_dbm)
            if (!std::isfinite(v)) throw std::invalid_argument("RssiTrace: non-finite sample");
    }

    std::size_t size() const { return samples_dbm.size(); }
    double time_at(std::size_t i) const { return start_time_s + static_cast<double>(i) * sample_interval_s; }
    double observation_length() const {
        return static_cast<double>(samples_dbm.size() - 1) * sample_interval_s;
    }
};

/// Resamples an irregular series onto a uniform grid by linear interpolation.
/// Packet-paced captures arrive with jittered timestamps; correlation needs
/// a fixed step.
inline RssiTrace resample_uniform(const std::vector<double>& times,
                                  const std::vector<double>& values, double interval_s) {
    if (times.size() != values.size() || times.size() < 2)
        throw std::invalid_argument("resample_uniform: need matching series of length >= 2");
    if (!std::is_sorted(times.begin(), times.end()))
        throw std::invalid_argument("resample_uniform: timestamps must be sorted");
    if (!(interval_s > 0.0)) throw std::invalid_argument("resample_uniform: interval must be > 0");

    const double t0 = times.front();
    const double t1 = times.back();
    const auto count = static_cast<std::size_t>(std::floor((t1 - t0) / interval_s + 1e-9)) + 1;
    std::vector<double> out(count);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const double t = t0 + static_cast<double>(i) * interval_s;
        while (seg + 2 < times.size() && times[seg + 1] < t) ++seg;
        const double span = times[seg + 1] - times[seg];
        const double alpha = span > 0.0 ? std::clamp((t - times[seg]) / span, 0.0, 1.0) : 0.0;
        out[i] = values[seg] * (1.0 - alpha) + values[seg + 1] * alpha;
    }
    return RssiTrace(std::move(out), interval_s, t0);
}

/// Dip template parameters: `ramp_fraction` controls the decay/rise portion
/// and `timescale_s` the flat bottom; the full template lasts
/// (1 + ramp_fraction) * timescale_s.
struct TemplateParams {
    double ramp_fraction{0.5};  // > 0
    double timescale_s{1.0};    // > 0

    double duration() const { return (1.0 + ramp_fraction) * timescale_s; }

    void validate() const {
        if (!(std::isfinite(ramp_fraction) && ramp_fraction > 0.0))
            throw std::invalid_argument("TemplateParams: ramp fraction must be > 0");
        if (!(std::isfinite(timescale_s) && timescale_s > 0.0))
            throw std::invalid_argument("TemplateParams: timescale must be > 0");
    }
};

/// Normalized template level at time t after dip onset: 0 outside the dip,
/// -1 on the flat floor, linear ramps in between.
inline double template_value(const TemplateParams& w, double t) {
    const double ramp = w.ramp_fraction * w.timescale_s / 2.0;
    const double total = w.duration();
    if (t <= 0.0 || t >= total) return 0.0;
    if (t < ramp) return -t / ramp;
    if (t <= total - ramp) return -1.0;
    return (t - total) / ramp;
}

/// Template sampled at the trace grid: values at t = 0, interval, ...,
/// floor(duration/interval) * interval.
inline std::vector<double> sample_template(const TemplateParams& w, double interval_s) {
    w.validate();
    if (!(interval_s > 0.0)) throw std::invalid_argument("sample_template: interval must be > 0");
    const auto count = static_cast<std::size_t>(std::floor(w.duration() / interval_s + 1e-9)) + 1;
    if (count < 3)
        throw std::invalid_argument("sample_template: template too short for the sample interval");
    std::vector<double> out(count);
    for (std::size_t j = 0; j < count; ++j)
        out[j] = template_value(w, static_cast<double>(j) * interval_s);
    return out;
}

struct DetectionConfig {
    std::vector<TemplateParams> templates;
    double correlation_threshold{0.6};
    double scan_step_s{0.0};  // 0 = one trace sample interval

    void validate() const {
        if (templates.empty()) throw std::invalid_argument("DetectionConfig: empty template bank");
        if (!(correlation_threshold > 0.0 && correlation_threshold < 1.0))
            throw std::invalid_argument("DetectionConfig: threshold must be in (0, 1)");
        for (const auto& w : templates) w.validate();
    }
};

/// Default bank: a dense mesh over crossing durations of roughly 2 to 7
/// seconds. Duration spacing of ~0.2-0.3 s keeps the matched event's start
/// time within a tenth of a second (a mismatched template aligns off-center
/// by half the duration gap). The shortest template still spans ~40
/// samples, keeping the 0.6 correlation threshold several noise standard
/// deviations out (window noise std scales as 1/sqrt(n)); sub-second
/// templates would fire on noise alone.
inline DetectionConfig default_detection_config() {
    DetectionConfig cfg;
    for (double tau : {1.8, 2.1, 2.4, 2.7, 3.0, 3.4, 3.8, 4.5, 5.5})
        for (double p : {0.1, 0.2, 0.3})
            cfg.templates.push_back({p, tau});
    return cfg;
}

/// Detected blockage: the dip spans [t_start, t_end] where
/// t_end - t_start is the matched template's duration.
struct BlockageEvent {
    double t_start_s{0.0};
    double t_end_s{0.0};
    double correlation{0.0};
    std::size_t template_index{0};
};

/// Zero-mean normalized correlation of the trace against the sampled
/// template, one value per full-window alignment. Alignment i covers trace
/// samples [i, i + window); both windows are centered before the dot
/// product, so the result is invariant to trace offset and positive scale
/// and lies in [-1, 1]. Windows with no measurable variation yield 0.
inline std::vector<double> normalized_correlation(const RssiTrace& trace,
                                                  const TemplateParams& w) {
    const std::vector<double> tmpl = sample_template(w, trace.sample_interval_s);
    const std::size_t m = tmpl.size();
    if (trace.size() <= m)
        throw std::invalid_argument("normalized_correlation: trace shorter than template");

    double tmean = 0.0;
    for (double v : tmpl) tmean += v;
    tmean /= static_cast<double>(m);
    std::vector<double> tcentered(m);
    double tvar = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        tcentered[j] = tmpl[j] - tmean;
        tvar += tcentered[j] * tcentered[j];
    }

    const std::size_t alignments = trace.size() - m + 1;
    std::vector<double> corr(alignments, 0.0);
    const double* r = trace.samples_dbm.data();
    for (std::size_t i = 0; i < alignments; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < m; ++j) mean += r[i + j];
        mean /= static_cast<double>(m);
        double num = 0.0;
        double var = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double centered = r[i + j] - mean;
            num += centered * tcentered[j];
            var += centered * centered;
        }
        // flat window: no similarity either way
        const double floor_sd = 1e-9 * std::max(1.0, std::abs(mean));
        if (var <= static_cast<double>(m) * floor_sd * floor_sd || tvar <= 0.0) continue;
        corr[i] = num / std::sqrt(var * tvar);
    }
    return corr;
}

struct CorrelationPeak {
    std::size_t index;
    double value;
};

/// In-window maxima of a correlation series: index i survives when c[i] is
/// the maximum over the window of `window` samples centered on i (clipped
/// at the series edges) and no earlier index in that window ties it.
inline std::vector<CorrelationPeak> detect_peaks(const std::vector<double>& series,
                                                 std::size_t window) {
    std::vector<CorrelationPeak> peaks;
    if (series.empty() || window == 0) return peaks;
    const auto n = static_cast<std::ptrdiff_t>(series.size());
    const auto radius = static_cast<std::ptrdiff_t>((window + 1) / 2) - 1;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - radius);
        const std::ptrdiff_t hi = std::min(n - 1, i + radius);
        bool is_peak = true;
        for (std::ptrdiff_t j = lo; j <= hi && is_peak; ++j) {
            if (series[j] > series[i]) is_peak = false;
            if (j < i && series[j] == series[i]) is_peak = false;  // earliest tie wins
        }
        if (is_peak) peaks.push_back({static_cast<std::size_t>(i), series[i]});
    }
    return peaks;
}

/// Candidate blockage events for one template: correlation peaks above the
/// threshold, each spanning one template duration from its start.
inline std::vector<BlockageEvent> detect_single(const RssiTrace& trace, const TemplateParams& w,
                                                const DetectionConfig& cfg,
                                                std::size_t template_index = 0) {
    const std::vector<double> corr = normalized_correlation(trace, w);
    const std::size_t window = sample_template(w, trace.sample_interval_s).size() - 1;
    std::vector<BlockageEvent> events;
    for (const auto& peak : detect_peaks(corr, window)) {
        if (peak.value <= cfg.correlation_threshold) continue;
        const double t_start = trace.time_at(peak.index);
        events.push_back({t_start, t_start + w.duration(), peak.value, template_index});
    }
    return events;
}

/// Resolves candidate events from several templates into a non-overlapping,
/// time-ordered list. Candidates overlapping in time are competing
/// detections of the same physical event, so at every covered instant the
/// winner must be the best-correlated candidate there: repeatedly select
/// the highest-correlation live candidate (ties: lower template index, then
/// earlier start) and retire everything overlapping it. Candidates that do
/// not strictly contain any scan instant of the observation window are
/// never eligible.
inline std::vector<BlockageEvent> resolve_candidates(std::vector<BlockageEvent> candidates,
                                                     double start_s, double horizon_s,
                                                     double scan_step_s) {
    if (!(scan_step_s > 0.0))
        throw std::invalid_argument("resolve_candidates: scan step must be > 0");
    const double end_s = start_s + horizon_s;
    std::vector<BlockageEvent> eligible;
    for (const auto& c : candidates) {
        // first scan instant strictly after the candidate's start (and not
        // before the observation window)
        const double k = std::max(std::floor((c.t_start_s - start_s) / scan_step_s) + 1.0, 0.0);
        const double scan_t = start_s + k * scan_step_s;
        if (scan_t < end_s && scan_t > c.t_start_s && scan_t < c.t_end_s)
            eligible.push_back(c);
    }
    std::sort(eligible.begin(), eligible.end(),
              [](const BlockageEvent& a, const BlockageEvent& b) {
                  if (a.correlation != b.correlation) return a.correlation > b.correlation;
                  if (a.template_index != b.template_index)
                      return a.template_index < b.template_index;
                  return a.t_start_s < b.t_start_s;
              });

    std::vector<BlockageEvent> out;
    std::vector<bool> retired(eligible.size(), false);
    for (std::size_t i = 0; i < eligible.size(); ++i) {
        if (retired[i]) continue;
        const auto& chosen = eligible[i];
        out.push_back(chosen);
        for (std::size_t j = i + 1; j < eligible.size(); ++j) {
            if (retired[j]) continue;
            if (eligible[j].t_start_s < chosen.t_end_s && eligible[j].t_end_s > chosen.t_start_s)
                retired[j] = true;
        }
    }
    std::sort(out.begin(), out.end(), [](const BlockageEvent& a, const BlockageEvent& b) {
        return a.t_start_s < b.t_start_s;
    });
    return out;
}

/// Full multi-template detection over a trace.
inline std::vector<BlockageEvent> detect_multi(const RssiTrace& trace,
                                               const DetectionConfig& cfg) {
    cfg.validate();
    std::vector<BlockageEvent> candidates;
    for (std::size_t k = 0; k < cfg.templates.size(); ++k) {
        // templates too long for the trace contribute no candidates
        const auto needed = static_cast<std::size_t>(
            std::floor(cfg.templates[k].duration() / trace.sample_interval_s + 1e-9)) + 1;
        if (trace.size() <= needed) continue;
        auto events = detect_single(trace, cfg.templates[k], cfg, k);
        candidates.insert(candidates.end(), events.begin(), events.end());
    }
    const double step = cfg.scan_step_s > 0.0 ? cfg.scan_step_s : trace.sample_interval_s;
    return resolve_candidates(std::move(candidates), trace.start_time_s,
                              trace.observation_length(), step);
}

}  // namespace sarrloc
