/*
 * Copyright 2026 The QCAD Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "explain.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "error.hpp"
#include "text.hpp"

namespace qcad::explain {
namespace {

std::string num(double v) { return text::format_fixed(v, 3); }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string svg_open(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " +
         num(h) + "\">\n<rect x=\"0\" y=\"0\" width=\"" + num(w) +
         "\" height=\"" + num(h) + "\" fill=\"white\"/>\n";
}

std::string line(std::string_view id, double x1, double y1, double x2, double y2,
                 std::string_view stroke, double width) {
  std::string out = "<line";
  if (!id.empty()) out += " id=\"" + std::string(id) + "\"";
  out += " x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
         "\" y2=\"" + num(y2) + "\" stroke=\"" + std::string(stroke) +
         "\" stroke-width=\"" + num(width) + "\"/>\n";
  return out;
}

std::string label(double x, double y, std::string_view anchor, double size,
                  std::string_view content) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" +
         std::string(anchor) + "\" font-family=\"sans-serif\" font-size=\"" +
         num(size) + "\">" + xml_escape(content) + "</text>\n";
}

}  // namespace

GroupHistogram group_histogram(const data::Dataset& ds,
                               const gower::ReferenceGroup& group,
                               std::size_t contextual_index) {
  const std::size_t f = ds.schema().contextual().at(contextual_index);
  const auto& col = ds.column(f);
  GroupHistogram h;
  h.feature = ds.schema().feature(f).name;
  h.object_value = col.values[group.center];
  if (ds.schema().feature(f).kind == data::Kind::kCategorical) {
    h.categorical = true;
    h.categories = col.categories;
    h.counts.assign(col.categories.size(), 0);
    for (auto r : group.members) ++h.counts[static_cast<std::size_t>(col.values[r])];
    return h;
  }
  if (group.members.empty()) return h;
  double lo = col.values[group.members.front()], hi = lo;
  for (auto r : group.members) {
    lo = std::min(lo, col.values[r]);
    hi = std::max(hi, col.values[r]);
  }
  const std::size_t bins = hi > lo ? kMaxHistogramBins : 1;
  for (std::size_t b = 0; b <= bins; ++b)
    h.edges.push_back(b == bins ? hi
                                : lo + (hi - lo) * static_cast<double>(b) /
                                           static_cast<double>(bins));
  h.counts.assign(bins, 0);
  for (auto r : group.members) {
    std::size_t b = 0;
    if (hi > lo)
      b = std::min(bins - 1, static_cast<std::size_t>(
                                 (col.values[r] - lo) / (hi - lo) *
                                 static_cast<double>(bins)));
    ++h.counts[b];
  }
  return h;
}

Explanation explain(const ObjectScore& entry, const data::Dataset& ds,
                    std::size_t h) {
  if (h < 1) throw ParameterError("explain: h must be >= 1");
  if (entry.partial_scores.size() != ds.behavioral_count())
    throw ParameterError("explain: score entry does not match the dataset");
  if (entry.index >= ds.size())
    throw ParameterError("explain: object index out of range");
  Explanation ex;
  ex.index = entry.index;
  ex.final_score = entry.final_score;
  ex.reference_group = entry.reference_group.members;

  std::vector<std::size_t> order(entry.partial_scores.size());
  for (std::size_t q = 0; q < order.size(); ++q) order[q] = q;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return entry.partial_scores[a] > entry.partial_scores[b];
  });
  order.resize(std::min(h, order.size()));
  for (auto q : order)
    ex.top_features.push_back(
        {q, ds.schema().feature(ds.schema().behavioral()[q]).name,
         entry.partial_scores[q]});

  gower::ReferenceGroup group = entry.reference_group;
  group.center = entry.index;
  for (std::size_t p = 0; p < ds.contextual_count(); ++p)
    ex.group_profile.push_back(group_histogram(ds, group, p));
  return ex;
}

std::string Explanation::to_json() const {
  nlohmann::ordered_json j;
  j["index"] = index;
  j["final_score"] = final_score;
  auto& top = j["top_features"] = nlohmann::ordered_json::array();
  for (const auto& f : top_features)
    top.push_back({{"feature", f.name}, {"index", f.feature}, {"score", f.score}});
  j["reference_group"] = reference_group;
  auto& profile = j["group_profile"] = nlohmann::ordered_json::array();
  for (const auto& hist : group_profile) {
    nlohmann::ordered_json e;
    e["feature"] = hist.feature;
    e["kind"] = hist.categorical ? "categorical" : "numeric";
    if (hist.categorical) {
      e["categories"] = hist.categories;
      e["value"] = hist.categories.at(static_cast<std::size_t>(hist.object_value));
    } else {
      e["edges"] = hist.edges;
      e["value"] = hist.object_value;
    }
    e["counts"] = hist.counts;
    profile.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::vector<double> silhouette_half_widths(const PercentileProfile& p,
                                           double full_half_width) {
  double min_positive = 0.0;
  for (double w : p.widths)
    if (w > 0.0 && (min_positive == 0.0 || w < min_positive)) min_positive = w;
  std::vector<double> out(p.widths.size(), 0.0);
  if (min_positive == 0.0) return out;
  const double peak = 0.01 / std::max(min_positive, kMinIntervalWidth);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double density = 0.01 / std::max(p.widths[i], kMinIntervalWidth);
    out[i] = std::min(full_half_width, full_half_width * density / peak);
  }
  return out;
}

std::string render_beanplot(const PercentileProfile& p, double actual,
                            std::string_view feature_name) {
  constexpr double left = 70.0, right = 20.0, top = 50.0, bottom = 30.0;
  constexpr double x0 = left, x1 = kBeanplotWidth - right;
  constexpr double plot_h = kBeanplotHeight - top - bottom;
  constexpr double cx = (x0 + x1) / 2.0;
  constexpr double half = (x1 - x0) / 2.0;

  const double lo = std::min(p.taus.front(), actual);
  const double hi = std::max(p.taus.back(), actual);
  const double span = hi - lo;
  const double pad = span > 0.0 ? 0.05 * span : std::max(0.05 * std::abs(lo), 0.05);
  const double y_min = lo - pad, y_max = hi + pad;
  auto y_of = [&](double v) { return top + (y_max - v) / (y_max - y_min) * plot_h; };

  std::string svg = svg_open(kBeanplotWidth, kBeanplotHeight);
  svg += label(kBeanplotWidth / 2.0, 28.0, "middle", 16.0, feature_name);

  // Axis with five labelled ticks.
  svg += line("axis", x0, top, x0, top + plot_h, "#444444", 1.0);
  for (int t = 0; t <= 4; ++t) {
    const double v = y_min + (y_max - y_min) * t / 4.0;
    svg += line("", x0 - 5.0, y_of(v), x0, y_of(v), "#444444", 1.0);
    svg += label(x0 - 8.0, y_of(v) + 4.0, "end", 11.0, num(v));
  }

  const auto hw = silhouette_half_widths(p, half);
  if (std::any_of(hw.begin(), hw.end(), [](double w) { return w > 0.0; })) {
    std::string pts;
    auto add = [&](double x, double y) {
      if (!pts.empty()) pts += ' ';
      pts += num(x) + "," + num(y);
    };
    for (std::size_t i = 0; i < hw.size(); ++i) {
      add(cx + hw[i], y_of(p.taus[i]));
      add(cx + hw[i], y_of(p.taus[i + 1]));
    }
    for (std::size_t i = hw.size(); i-- > 0;) {
      add(cx - hw[i], y_of(p.taus[i + 1]));
      add(cx - hw[i], y_of(p.taus[i]));
    }
    svg += "<polygon id=\"silhouette\" points=\"" + pts +
           "\" fill=\"red\" fill-opacity=\"0.45\" stroke=\"none\"/>\n";
  }

  const double median = p.taus[p.taus.size() / 2];
  svg += "<rect id=\"quartile-box\" x=\"" + num(cx - 40.0) + "\" y=\"" +
         num(y_of(p.q75)) + "\" width=\"80.000\" height=\"" +
         num(y_of(p.q25) - y_of(p.q75)) +
         "\" fill=\"cyan\" fill-opacity=\"0.25\" stroke=\"#00a0b0\" "
         "stroke-width=\"2.000\"/>\n";
  svg += line("median", cx - 40.0, y_of(median), cx + 40.0, y_of(median),
              "#00a0b0", 2.0);

  svg += "<g id=\"percentiles\">\n";
  for (double tau : p.taus)
    svg += line("", cx - 20.0, y_of(tau), cx + 20.0, y_of(tau), "blue", 1.0);
  svg += "</g>\n";

  svg += line("actual", x0, y_of(actual), x1, y_of(actual), "black", 2.0);
  svg += label(x1, y_of(actual) - 4.0, "end", 11.0, "actual " + num(actual));
  svg += "</svg>\n";
  return svg;
}

std::string render_histogram(const GroupHistogram& h) {
  constexpr double width = 400.0, height = 300.0;
  constexpr double left = 50.0, right = 20.0, top = 40.0, bottom = 60.0;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;

  std::string svg = svg_open(width, height);
  svg += label(width / 2.0, 24.0, "middle", 15.0, h.feature + " (reference group)");
  svg += line("axis", left, top + plot_h, left + plot_w, top + plot_h, "#444444", 1.0);

  const std::size_t bins = h.counts.size();
  std::size_t peak = 1;
  for (auto c : h.counts) peak = std::max(peak, c);
  const double bar_w = bins ? plot_w / static_cast<double>(bins) : plot_w;
  svg += label(left - 6.0, top + 4.0, "end", 10.0, std::to_string(peak));

  for (std::size_t b = 0; b < bins; ++b) {
    const double bh = plot_h * static_cast<double>(h.counts[b]) / static_cast<double>(peak);
    const bool own = h.categorical && static_cast<double>(b) == h.object_value;
    svg += "<rect x=\"" + num(left + b * bar_w + 1.0) + "\" y=\"" +
           num(top + plot_h - bh) + "\" width=\"" + num(std::max(bar_w - 2.0, 0.5)) +
           "\" height=\"" + num(bh) + "\" fill=\"" + (own ? "black" : "steelblue") +
           "\"/>\n";
    const std::string tick = h.categorical ? h.categories[b] : num(h.edges[b]);
    svg += label(left + (static_cast<double>(b) + (h.categorical ? 0.5 : 0.0)) * bar_w,
                 top + plot_h + 16.0, "middle", 9.0, tick);
  }
  if (!h.categorical && !h.edges.empty()) {
    svg += label(left + plot_w, top + plot_h + 16.0, "middle", 9.0, num(h.edges.back()));
    const double lo = h.edges.front(), hi = h.edges.back();
    double frac = hi > lo ? (h.object_value - lo) / (hi - lo) : 0.5;
    frac = std::clamp(frac, 0.0, 1.0);
    svg += line("object", left + frac * plot_w, top, left + frac * plot_w,
                top + plot_h, "black", 2.0);
  }
  svg += label(width / 2.0, height - 14.0, "middle", 11.0,
               "object value: " + (h.categorical
                                       ? h.categories.at(static_cast<std::size_t>(h.object_value))
                                       : num(h.object_value)));
  svg += "</svg>\n";
  return svg;
}

}  // namespace qcad::explain
