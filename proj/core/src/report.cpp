#include "demux/report.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "demux/errors.hpp"

namespace demux {
namespace {

// Restores the stream precision on scope exit.
class FullPrecision {
 public:
  explicit FullPrecision(std::ostream& out) : out_(out), old_(out.precision(17)) {}
  ~FullPrecision() { out_.precision(old_); }
  FullPrecision(const FullPrecision&) = delete;
  FullPrecision& operator=(const FullPrecision&) = delete;

 private:
  std::ostream& out_;
  std::streamsize old_;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_double(std::string_view s, double& value) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& h) {
  const FullPrecision guard(out);
  out << "delay_bins,delay_ns,count,sigma\n";
  for (int d = -h.max_delay_bins; d <= h.max_delay_bins; ++d) {
    const auto count = h.at(d);
    out << d << ',' << d * static_cast<double>(h.bin_width_ps) * 1e-3 << ',' << count << ','
        << std::sqrt(static_cast<double>(count)) << '\n';
  }
}

void write_nfold_csv(std::ostream& out, std::span<const NFoldCounts> rows) {
  const FullPrecision guard(out);
  out << "n,channels,window_ns,count,acquisition_s,rate_hz,rate_sigma_hz\n";
  for (const auto& r : rows) {
    out << r.n << ',';
    for (std::size_t i = 0; i < r.channels.size(); ++i) {
      out << (i ? "-" : "") << r.channels[i];
    }
    out << ',' << r.window_s * 1e9 << ',' << r.count << ',' << r.acquisition_s << ','
        << r.rate_hz << ',' << r.rate_sigma_hz << '\n';
  }
}

void write_predictions_csv(std::ostream& out, std::span<const RatePrediction> rows) {
  const FullPrecision guard(out);
  out << "n,scheme,rate_hz\n";
  for (const auto& r : rows) out << r.n << ',' << to_string(r.scheme) << ',' << r.rate_hz << '\n';
}

void write_saturation_csv(std::ostream& out, std::span<const SaturationPoint> data) {
  const FullPrecision guard(out);
  out << "power_uw,rate_hz,sigma_hz\n";
  for (const auto& p : data) out << p.power_uw << ',' << p.rate_hz << ',' << p.sigma_hz << '\n';
}

std::vector<SaturationPoint> read_saturation_csv(std::istream& in) {
  std::vector<SaturationPoint> data;
  std::string line;
  int line_no = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = view.find(',', start);
      fields.push_back(view.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    SaturationPoint p;
    const bool ok = fields.size() == 3 && parse_double(fields[0], p.power_uw) &&
                    parse_double(fields[1], p.rate_hz) && parse_double(fields[2], p.sigma_hz);
    if (!ok) {
      if (header_allowed && trim(fields[0]) == "power_uw") {
        header_allowed = false;
        continue;
      }
      throw DataError("saturation data line " + std::to_string(line_no) +
                      ": expected power_uw,rate_hz,sigma_hz");
    }
    header_allowed = false;
    data.push_back(p);
  }
  return data;
}

void write_fit_curve_csv(std::ostream& out, const FitResult& fit, double max_power_uw,
                         int points) {
  if (points < 2) throw DomainError("fit curve needs at least 2 points");
  const FullPrecision guard(out);
  const double c_max = fit.value("c_max_hz");
  const double p0 = fit.value("p0_uw");
  out << "power_uw,model_rate_hz\n";
  for (int i = 0; i < points; ++i) {
    const double p = max_power_uw * i / (points - 1);
    out << p << ',' << saturation_coincidence_rate(p, c_max, p0) << '\n';
  }
}

void write_splitting_csv(std::ostream& out, const SplittingEstimate& estimate) {
  const FullPrecision guard(out);
  out << "coupler,state,ratio,sigma\n";
  for (std::size_t i = 0; i < estimate.parameters.size(); ++i) {
    out << estimate.parameters[i].first << ',' << estimate.parameters[i].second << ','
        << estimate.ratios[i].value << ',' << estimate.ratios[i].sigma << '\n';
  }
}

}  // namespace demux
