#include "dldl/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "dldl/errors.hpp"

namespace dldl {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+')
    field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError("cannot parse number '" + std::string(field) + "'", line);
  if (!std::isfinite(v))
    throw ParseError("non-finite value '" + std::string(field) + "'", line);
  return v;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> lines_of(const std::string &text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    lines.push_back(rest.substr(0, nl));
    if (nl == std::string_view::npos)
      break;
    rest.remove_prefix(nl + 1);
  }
  return lines;
}

} // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool Dataset::has_sigma() const noexcept {
  if (samples.empty())
    return false;
  for (const auto &s : samples)
    if (!s.sigma)
      return false;
  return true;
}

std::size_t Dataset::out_of_range_count() const noexcept {
  std::size_t n = 0;
  for (const auto &s : samples)
    n += !space.contains(s.target);
  return n;
}

Vector Dataset::targets() const {
  Vector t;
  t.reserve(samples.size());
  for (const auto &s : samples)
    t.push_back(s.target);
  return t;
}

Vector Dataset::sigmas() const {
  Vector t;
  if (!has_sigma())
    return t;
  for (const auto &s : samples)
    t.push_back(*s.sigma);
  return t;
}

void validate_dataset(const Dataset &data) {
  if (data.empty())
    throw InvalidArgument("dataset is empty");
  const std::size_t d = data.dim();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto &s = data.samples[i];
    if (s.features.size() != d)
      throw InvalidArgument("sample " + std::to_string(i) + " has a different feature length");
    if (!all_finite(s.features) || !std::isfinite(s.target))
      throw InvalidArgument("sample " + std::to_string(i) + " has non-finite values");
    if (s.sigma && !(*s.sigma > 0.0))
      throw InvalidArgument("sample " + std::to_string(i) + " has a non-positive sigma");
  }
}

Dataset gen_synthetic(const SynthConfig &config, const LabelSpace &space) {
  if (config.n < 1 || config.dim < 2 || !(config.noise_std >= 0.0))
    throw InvalidArgument("synthetic config needs n >= 1, dim >= 2 and noise_std >= 0");
  if (config.curve != "sinusoid")
    throw InvalidArgument("unknown synthetic curve '" + config.curve + "'");
  if (config.label_sigma && !(*config.label_sigma > 0.0))
    throw InvalidArgument("label_sigma must be positive");

  constexpr double pi = std::numbers::pi;
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> freq(0.5 * pi, 3.0 * pi);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
  Vector omega(config.dim), phi(config.dim);
  for (std::size_t i = 0; i < config.dim; ++i) {
    omega[i] = freq(rng);
    phi[i] = phase(rng);
  }

  std::uniform_real_distribution<double> latent(space.l_min, space.l_max);
  std::normal_distribution<double> noise(0.0, config.noise_std > 0.0 ? config.noise_std : 1.0);
  const double range = space.l_max - space.l_min;
  Dataset data;
  data.space = space;
  data.samples.reserve(config.n);
  for (std::size_t n = 0; n < config.n; ++n) {
    Sample s;
    s.target = latent(rng);
    const double t = (s.target - space.l_min) / range;
    s.features.resize(config.dim);
    for (std::size_t i = 0; i < config.dim; ++i) {
      s.features[i] = std::sin(omega[i] * t + phi[i]);
      if (config.noise_std > 0.0)
        s.features[i] += noise(rng);
    }
    s.sigma = config.label_sigma;
    data.samples.push_back(std::move(s));
  }
  std::ostringstream prov;
  prov << "synthetic:" << config.curve << ":n=" << config.n << ":dim=" << config.dim
       << ":noise=" << format_double(config.noise_std) << ":seed=" << config.seed;
  data.provenance = prov.str();
  return data;
}

Dataset parse_csv(const std::string &text, const LabelSpace &space,
                  const std::string &provenance) {
  const auto lines = lines_of(text);
  if (lines.empty())
    throw ParseError("missing header", 1);
  std::string_view header_line = lines[0];
  if (header_line.starts_with("\xEF\xBB\xBF"))
    header_line.remove_prefix(3);
  const auto header = split_fields(header_line);
  std::size_t d = 0;
  while (d < header.size() && trim(header[d]) == "f" + std::to_string(d))
    ++d;
  if (d == 0 || d >= header.size() || trim(header[d]) != "y")
    throw ParseError("header must be f0,...,f{d-1},y[,sigma]", 1);
  const bool with_sigma = header.size() == d + 2;
  if (header.size() > d + 2 || (with_sigma && trim(header[d + 1]) != "sigma"))
    throw ParseError("unexpected header column after y", 1);

  Dataset data;
  data.space = space;
  data.provenance = provenance;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty())
      continue;
    const auto fields = split_fields(lines[li]);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       li + 1);
    Sample s;
    s.features.resize(d);
    for (std::size_t i = 0; i < d; ++i)
      s.features[i] = parse_number(fields[i], li + 1);
    s.target = parse_number(fields[d], li + 1);
    if (with_sigma)
      s.sigma = parse_number(fields[d + 1], li + 1);
    data.samples.push_back(std::move(s));
  }
  return data;
}

Dataset load_csv(const std::filesystem::path &path, const LabelSpace &space) {
  return parse_csv(read_file(path), space, path.string());
}

void save_csv(const std::filesystem::path &path, const Dataset &data) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InvalidArgument("cannot write " + path.string());
  const bool with_sigma = data.has_sigma();
  for (std::size_t i = 0; i < data.dim(); ++i)
    out << 'f' << i << ',';
  out << 'y' << (with_sigma ? ",sigma\n" : "\n");
  for (const auto &s : data.samples) {
    for (double f : s.features)
      out << format_double(f) << ',';
    out << format_double(s.target);
    if (with_sigma)
      out << ',' << format_double(*s.sigma);
    out << '\n';
  }
}

void save_predictions(const std::filesystem::path &path, std::span<const double> preds,
                      std::span<const double> truths) {
  if (preds.size() != truths.size())
    throw InvalidArgument("prediction and truth lengths differ");
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InvalidArgument("cannot write " + path.string());
  out << "index,y_true,y_pred\n";
  for (std::size_t i = 0; i < preds.size(); ++i)
    out << i << ',' << format_double(truths[i]) << ',' << format_double(preds[i]) << '\n';
}

std::vector<PredictionRow> load_predictions(const std::filesystem::path &path) {
  const std::string text = read_file(path);
  const auto lines = lines_of(text);
  if (lines.empty() || trim(lines[0]) != "index,y_true,y_pred")
    throw ParseError("header must be index,y_true,y_pred", 1);
  std::vector<PredictionRow> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty())
      continue;
    const auto fields = split_fields(lines[li]);
    if (fields.size() != 3)
      throw ParseError("expected 3 fields", li + 1);
    PredictionRow row;
    row.index = static_cast<std::size_t>(parse_number(fields[0], li + 1));
    row.y_true = parse_number(fields[1], li + 1);
    row.y_pred = parse_number(fields[2], li + 1);
    rows.push_back(row);
  }
  return rows;
}

std::pair<Dataset, Dataset> split(const Dataset &data, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train fraction must lie in (0, 1)");
  const std::size_t n = data.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n)
    throw InvalidArgument("train fraction leaves one side of the split empty");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i)
    order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
  Dataset train{{}, data.space, data.provenance + ":train"};
  Dataset test{{}, data.space, data.provenance + ":test"};
  for (std::size_t i = 0; i < n; ++i)
    (i < n_train ? train : test).samples.push_back(data.samples[order[i]]);
  return {std::move(train), std::move(test)};
}

} // namespace dldl
