#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hgl/landmarks.hpp"

namespace hgl {

/// Semantic correspondences between two landmark schemes.
struct SchemeMap {
  std::string name_a, name_b;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

inline void validate(const SchemeMap& map, std::size_t m_a, std::size_t m_b) {
  std::vector<std::uint8_t> seen_a(m_a, 0), seen_b(m_b, 0);
  for (auto [a, b] : map.pairs) {
    op_check(a < m_a && b < m_b, "scheme map: index out of range");
    op_check(!seen_a[a] && !seen_b[b], "scheme map: index used twice on one side");
    seen_a[a] = seen_b[b] = 1;
  }
}

/// Face size for error normalisation: sqrt(w*h) of the tight bounding box
/// of visible ground-truth landmarks. Undefined with fewer than 2 visible.
inline std::optional<double> face_size(const LandmarkSet& gt) {
  validate(gt);
  std::size_t visible = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) visible += gt.visible(i) ? 1 : 0;
  if (visible < 2) return std::nullopt;
  const Box box = *visible_bbox(gt);
  return std::sqrt((box.x1 - box.x0) * (box.y1 - box.y0));
}

inline double point_distance(const Landmark& a, const Landmark& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Normalised mean error: mean image-plane distance over the landmarks in
/// `subset` (all when absent) that are visible in the ground truth, divided
/// by face_size(gt). Undefined when the denominator is undefined or zero,
/// or no landmark survives the visibility intersection.
inline std::optional<double> nme(const LandmarkSet& pred, const LandmarkSet& gt,
                                 const std::optional<std::vector<std::size_t>>& subset = {}) {
  validate(pred);
  validate(gt);
  op_check(pred.scheme == gt.scheme, "nme: scheme mismatch: " + pred.scheme + " vs " + gt.scheme);
  op_check(pred.size() == gt.size(), "nme: landmark count mismatch");
  const std::optional<double> denom = face_size(gt);
  if (!denom || *denom <= 0.0) return std::nullopt;

  std::vector<std::size_t> indices;
  if (subset) {
    for (std::size_t i : *subset) {
      op_check(i < gt.size(), "nme: subset index " + std::to_string(i) + " out of range");
      indices.push_back(i);
    }
  } else {
    for (std::size_t i = 0; i < gt.size(); ++i) indices.push_back(i);
  }
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i : indices) {
    if (!gt.visible(i)) continue;
    acc += point_distance(pred.points[i], gt.points[i]);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return acc / static_cast<double>(n) / *denom;
}

/// Default threshold grid for cumulative error curves: 0 to 0.10 in steps
/// of 0.001.
inline std::vector<double> ced_default_thresholds() {
  std::vector<double> t;
  for (int i = 0; i <= 100; ++i) t.push_back(static_cast<double>(i) / 1000.0);
  return t;
}

/// Cumulative error distribution: at each threshold, the fraction of
/// samples whose error is at or below it.
inline std::vector<std::pair<double, double>> ced(const std::vector<double>& nmes,
                                                  const std::vector<double>& thresholds) {
  op_check(!nmes.empty(), "ced: no samples");
  op_check(!thresholds.empty(), "ced: no thresholds");
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    op_check(thresholds[i] > thresholds[i - 1], "ced: thresholds must be strictly increasing");
  std::vector<std::pair<double, double>> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    std::size_t count = 0;
    for (double e : nmes) count += e <= t ? 1 : 0;
    curve.emplace_back(t, static_cast<double>(count) / static_cast<double>(nmes.size()));
  }
  return curve;
}

/// Area under the piecewise-linear curve on [0, cutoff], divided by cutoff.
/// The curve must start at threshold 0 and extend to the cutoff; a cutoff
/// between grid points is handled by linear interpolation.
inline double auc(const std::vector<std::pair<double, double>>& curve, double cutoff) {
  op_check(curve.size() >= 2, "auc: curve needs at least two points");
  op_check(curve.front().first == 0.0, "auc: curve must start at threshold 0");
  op_check(cutoff > 0.0, "auc: cutoff must be positive");
  op_check(curve.back().first >= cutoff, "auc: curve ends before the cutoff");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    auto [t0, f0] = curve[i - 1];
    auto [t1, f1] = curve[i];
    op_check(t1 > t0, "auc: thresholds must be strictly increasing");
    if (t0 >= cutoff) break;
    if (t1 > cutoff) {
      const double fc = f0 + (f1 - f0) * (cutoff - t0) / (t1 - t0);
      area += (f0 + fc) / 2.0 * (cutoff - t0);
      break;
    }
    area += (f0 + f1) / 2.0 * (t1 - t0);
  }
  return area / cutoff;
}

/// Per-landmark normalised error: for each landmark id, the mean over
/// samples (visible in gt, face size defined) of distance / face size.
/// Landmarks visible in no usable sample are omitted and noted.
inline std::map<std::size_t, double> per_landmark_nme(
    const std::vector<LandmarkSet>& preds, const std::vector<LandmarkSet>& gts,
    const std::optional<std::vector<std::size_t>>& subset = {},
    std::vector<std::string>* notes = nullptr) {
  op_check(preds.size() == gts.size(), "per-landmark nme: sample lists disagree");
  op_check(!preds.empty(), "per-landmark nme: no samples");
  const std::size_t m = gts.front().size();
  std::vector<std::size_t> indices;
  if (subset) {
    for (std::size_t i : *subset) {
      op_check(i < m, "per-landmark nme: subset index out of range");
      indices.push_back(i);
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) indices.push_back(i);
  }
  std::map<std::size_t, double> acc;
  std::map<std::size_t, std::size_t> count;
  for (std::size_t s = 0; s < preds.size(); ++s) {
    const auto& pred = preds[s];
    const auto& gt = gts[s];
    op_check(pred.scheme == gt.scheme && pred.size() == gt.size() && gt.size() == m,
             "per-landmark nme: sample " + std::to_string(s) + " disagrees with the rest");
    const std::optional<double> denom = face_size(gt);
    if (!denom || *denom <= 0.0) {
      if (notes)
        notes->push_back("sample " + std::to_string(s) + " excluded: face size undefined");
      continue;
    }
    for (std::size_t i : indices) {
      if (!gt.visible(i)) continue;
      acc[i] += point_distance(pred.points[i], gt.points[i]) / *denom;
      count[i] += 1;
    }
  }
  std::map<std::size_t, double> out;
  for (std::size_t i : indices) {
    auto it = count.find(i);
    if (it == count.end()) {
      if (notes)
        notes->push_back("landmark " + std::to_string(i) + " omitted: visible in no sample");
      continue;
    }
    out[i] = acc[i] / static_cast<double>(it->second);
  }
  return out;
}

/// Projects two landmark sets onto the mapped common pairs, index-aligned,
/// with visibility AND-ed across the pair.
inline std::pair<LandmarkSet, LandmarkSet> common_subset(const SchemeMap& map,
                                                         const LandmarkSet& a,
                                                         const LandmarkSet& b) {
  validate(a);
  validate(b);
  op_check(a.scheme == map.name_a, "common subset: first set is " + a.scheme +
                                       ", map expects " + map.name_a);
  op_check(b.scheme == map.name_b, "common subset: second set is " + b.scheme +
                                       ", map expects " + map.name_b);
  validate(map, a.size(), b.size());
  LandmarkSet out_a, out_b;
  out_a.scheme = a.scheme;
  out_b.scheme = b.scheme;
  for (auto [ia, ib] : map.pairs) {
    const std::uint8_t vis = a.visibility[ia] && b.visibility[ib] ? 1 : 0;
    out_a.points.push_back(a.points[ia]);
    out_b.points.push_back(b.points[ib]);
    out_a.visibility.push_back(vis);
    out_b.visibility.push_back(vis);
  }
  return {std::move(out_a), std::move(out_b)};
}

struct EvalReport {
  std::vector<double> per_sample_nme;              // defined samples only, in order
  std::vector<std::pair<double, double>> ced;      // (threshold, fraction)
  double auc = 0.0;
  std::map<std::size_t, double> per_landmark_nme;
  std::vector<std::size_t> excluded_samples;
  std::vector<std::string> notes;
};

/// Full evaluation pass over aligned prediction/ground-truth lists.
inline EvalReport evaluate(const std::vector<LandmarkSet>& preds,
                           const std::vector<LandmarkSet>& gts,
                           const std::optional<std::vector<std::size_t>>& subset = {},
                           const std::vector<double>& thresholds = ced_default_thresholds(),
                           double cutoff = 0.10) {
  op_check(preds.size() == gts.size(), "evaluate: sample lists disagree");
  op_check(!preds.empty(), "evaluate: no samples");
  EvalReport report;
  for (std::size_t s = 0; s < preds.size(); ++s) {
    const std::optional<double> e = nme(preds[s], gts[s], subset);
    if (e) {
      report.per_sample_nme.push_back(*e);
    } else {
      report.excluded_samples.push_back(s);
      report.notes.push_back("sample " + std::to_string(s) +
                             " excluded: undefined face size or empty subset");
    }
  }
  op_check(!report.per_sample_nme.empty(), "evaluate: every sample was excluded");
  report.ced = ced(report.per_sample_nme, thresholds);
  report.auc = auc(report.ced, cutoff);
  report.per_landmark_nme = per_landmark_nme(preds, gts, subset, &report.notes);
  return report;
}

}  // namespace hgl
