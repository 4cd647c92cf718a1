#include "dlroc/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "dlroc/error.hpp"
#include "dlroc/rng.hpp"

namespace dlroc {

void Dataset::validate() const {
  const std::size_t n = static_cast<std::size_t>(samples.cols());
  if (labels.size() != n || groups.size() != n)
    fail(ErrorKind::LengthMismatch, "labels/groups must have one entry per sample");
  if (samples.rows() < 1) fail(ErrorKind::DimensionMismatch, "dataset has no channels");
  require_finite(samples, "samples");
  const int k = num_labels();
  std::vector<char> seen(static_cast<std::size_t>(std::max(k, 0)), 0);
  for (int l : labels) {
    if (l < 1 || l > k) fail(ErrorKind::LabelOutOfRange, "label " + std::to_string(l) + " outside 1.." + std::to_string(k));
    seen[static_cast<std::size_t>(l - 1)] = 1;
  }
  for (int l = 0; l < k; ++l)
    if (!seen[static_cast<std::size_t>(l)]) fail(ErrorKind::InsufficientData, "label " + std::to_string(l + 1) + " has no samples");
}

std::vector<int> Dataset::group_ids() const {
  std::set<int> ids(groups.begin(), groups.end());
  return {ids.begin(), ids.end()};
}

std::vector<std::size_t> Dataset::indices_of_label(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) out.push_back(i);
  return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.label_names = label_names;
  out.samples.resize(samples.rows(), static_cast<Eigen::Index>(indices.size()));
  out.labels.reserve(indices.size());
  out.groups.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.samples.col(static_cast<Eigen::Index>(i)) = samples.col(static_cast<Eigen::Index>(indices[i]));
    out.labels.push_back(labels[indices[i]]);
    out.groups.push_back(groups[indices[i]]);
  }
  return out;
}

LabeledTrainingSet Dataset::by_label() const {
  LabeledTrainingSet out;
  for (int k = 1; k <= num_labels(); ++k) out.blocks.push_back(subset(indices_of_label(k)).samples);
  return out;
}

bool Dataset::operator==(const Dataset& other) const {
  return labels == other.labels && groups == other.groups && label_names == other.label_names &&
         samples.rows() == other.samples.rows() && samples.cols() == other.samples.cols() && samples == other.samples;
}

void SynthSpec::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::BadSpec, what); };
  if (m < 1) bad("m must be >= 1");
  if (labels < 1) bad("labels must be >= 1");
  if (atoms_per_label < 1) bad("atoms_per_label must be >= 1");
  if (samples_per_label < 1) bad("samples_per_label must be >= 1");
  if (sparsity < 1 || sparsity > atoms_per_label) bad("sparsity must lie in 1..atoms_per_label");
  if (!(gaussian_sigma >= 0.0) || !std::isfinite(gaussian_sigma)) bad("gaussian_sigma must be finite and >= 0");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) bad("outlier_fraction must lie in [0, 1)");
  if (!(outlier_magnitude > 0.0) || !std::isfinite(outlier_magnitude)) bad("outlier_magnitude must be > 0");
  if (groups < 1) bad("groups must be >= 1");
}

SyntheticData generate_synthetic_detailed(const SynthSpec& spec) {
  spec.validate();
  CounterRng rng(spec.seed);
  SyntheticData out;

  for (int k = 0; k < spec.labels; ++k) {
    RealMatrix basis(spec.m, spec.atoms_per_label);
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
      double n = 0.0;
      while (n == 0.0) {
        for (Eigen::Index i = 0; i < basis.rows(); ++i) basis(i, j) = rng.normal();
        n = basis.col(j).norm();
      }
      basis.col(j) /= n;
    }
    out.bases.push_back(std::move(basis));
  }

  const Eigen::Index total = static_cast<Eigen::Index>(spec.labels) * spec.samples_per_label;
  Dataset& data = out.data;
  data.samples.resize(spec.m, total);
  data.labels.reserve(static_cast<std::size_t>(total));
  data.groups.reserve(static_cast<std::size_t>(total));
  for (int k = 1; k <= spec.labels; ++k) data.label_names.push_back(std::to_string(k));

  RealVector coef(spec.atoms_per_label);
  Eigen::Index col = 0;
  for (int k = 0; k < spec.labels; ++k) {
    for (int s = 0; s < spec.samples_per_label; ++s, ++col) {
      coef.setZero();
      const auto support = sample_without_replacement(static_cast<std::size_t>(spec.atoms_per_label),
                                                      static_cast<std::size_t>(spec.sparsity), rng);
      for (std::size_t idx : support) {
        const double mag = rng.uniform(0.5, 1.5);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        coef[static_cast<Eigen::Index>(idx)] = sign * mag;
      }
      data.samples.col(col) = out.bases[static_cast<std::size_t>(k)] * coef;
      for (Eigen::Index i = 0; i < spec.m; ++i) {
        const double noise = rng.normal();
        data.samples(i, col) += spec.gaussian_sigma * noise;
      }
      data.labels.push_back(k + 1);
      data.groups.push_back(s % spec.groups + 1);
    }
  }

  double* entries = data.samples.data();
  for (Eigen::Index i = 0; i < data.samples.size(); ++i) {
    if (rng.uniform() < spec.outlier_fraction) {
      entries[i] = rng.uniform(-spec.outlier_magnitude, spec.outlier_magnitude);
      ++out.outlier_entries;
    }
  }
  return out;
}

Dataset generate_synthetic(const SynthSpec& spec) { return generate_synthetic_detailed(spec).data; }

std::pair<Dataset, Dataset> split_by_group(const Dataset& data, const std::set<int>& train_groups) {
  if (train_groups.empty()) fail(ErrorKind::EmptySplit, "no training groups given");
  const std::vector<int> present = data.group_ids();
  for (int g : train_groups)
    if (!std::binary_search(present.begin(), present.end(), g))
      fail(ErrorKind::EmptySplit, "training group " + std::to_string(g) + " is not present in the data");
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  for (std::size_t i = 0; i < data.size(); ++i) (train_groups.count(data.groups[i]) ? left : right).push_back(i);
  if (left.empty() || right.empty()) fail(ErrorKind::EmptySplit, "split leaves one side without samples");
  return {data.subset(left), data.subset(right)};
}

std::set<int> draw_groups(const Dataset& data, std::size_t count, std::uint64_t seed) {
  const std::vector<int> present = data.group_ids();
  if (count < 1 || count >= present.size())
    fail(ErrorKind::InsufficientGroups, "need 1 <= train groups < " + std::to_string(present.size()));
  CounterRng rng(seed);
  std::set<int> out;
  for (std::size_t i : sample_without_replacement(present.size(), count, rng)) out.insert(present[i]);
  return out;
}

Dataset subsample_per_label(const Dataset& data, std::size_t per_label, std::uint64_t seed) {
  std::vector<std::size_t> picked;
  for (int k = 1; k <= data.num_labels(); ++k) {
    const auto idx = data.indices_of_label(k);
    if (idx.size() < per_label)
      fail(ErrorKind::InsufficientData, "label " + std::to_string(k) + " has " + std::to_string(idx.size()) +
                                            " samples, " + std::to_string(per_label) + " requested");
    CounterRng rng(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    for (std::size_t i : sample_without_replacement(idx.size(), per_label, rng)) picked.push_back(idx[i]);
  }
  return data.subset(picked);
}

// --- CSV ---------------------------------------------------------------------

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Line reader over gzFile; zlib passes uncompressed files through unchanged.
class LineReader {
 public:
  explicit LineReader(const std::string& path) : file_(gzopen(path.c_str(), "rb")) {
    if (!file_) fail(ErrorKind::IoError, "cannot open " + path);
  }
  ~LineReader() { gzclose(file_); }
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  bool next(std::string& line) {
    line.clear();
    char buf[8192];
    bool any = false;
    while (gzgets(file_, buf, sizeof buf)) {
      any = true;
      line += buf;
      if (!line.empty() && line.back() == '\n') break;
    }
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    return any;
  }

 private:
  gzFile file_;
};

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    std::string_view field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_field(std::string_view field, std::size_t line_no, const char* column) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) +
                                    "' in column " + column);
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) fail(ErrorKind::SchemaError, path + " is empty; missing columns group, label, c1");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM

  const auto header = split_commas(line);
  int group_col = -1;
  int label_col = -1;
  std::map<int, int> channel_cols;  // channel number -> column
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string_view h = header[i];
    if (h == "group") {
      group_col = static_cast<int>(i);
    } else if (h == "label") {
      label_col = static_cast<int>(i);
    } else if (h.size() > 1 && h[0] == 'c') {
      int ch = 0;
      const auto [ptr, ec] = std::from_chars(h.data() + 1, h.data() + h.size(), ch);
      if (ec == std::errc() && ptr == h.data() + h.size() && ch >= 1) channel_cols[ch] = static_cast<int>(i);
    }
  }
  std::vector<std::string> missing;
  if (group_col < 0) missing.emplace_back("group");
  if (label_col < 0) missing.emplace_back("label");
  const int m = channel_cols.empty() ? 0 : channel_cols.rbegin()->first;
  if (m == 0) missing.emplace_back("c1");
  for (int c = 1; c <= m; ++c)
    if (!channel_cols.count(c)) missing.push_back("c" + std::to_string(c));
  if (!missing.empty()) {
    std::string list;
    for (const auto& s : missing) list += (list.empty() ? "" : ", ") + s;
    fail(ErrorKind::SchemaError, path + ": missing columns " + list);
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::vector<int> groups;
  std::size_t line_no = 1;
  while (reader.next(line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size())
      fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                      " fields, found " + std::to_string(fields.size()));
    groups.push_back(parse_field<int>(fields[static_cast<std::size_t>(group_col)], line_no, "group"));
    labels.push_back(parse_field<int>(fields[static_cast<std::size_t>(label_col)], line_no, "label"));
    for (int c = 1; c <= m; ++c) {
      const double v = parse_field<double>(fields[static_cast<std::size_t>(channel_cols[c])], line_no, "channel");
      if (!std::isfinite(v)) fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": non-finite value");
      values.push_back(v);
    }
  }

  Dataset data;
  data.samples = Eigen::Map<RealMatrix>(values.data(), m, static_cast<Eigen::Index>(labels.size()));
  data.labels = std::move(labels);
  data.groups = std::move(groups);
  const int k = data.labels.empty() ? 0 : *std::max_element(data.labels.begin(), data.labels.end());
  for (int i = 1; i <= k; ++i) data.label_names.push_back(std::to_string(i));
  if (data.labels.empty()) fail(ErrorKind::InsufficientData, path + " has no samples");
  data.validate();
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  data.validate();
  std::string text = "group,label";
  for (Eigen::Index c = 1; c <= data.channels(); ++c) text += ",c" + std::to_string(c);
  text += '\n';
  char num[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    text += std::to_string(data.groups[i]);
    text += ',';
    text += std::to_string(data.labels[i]);
    for (Eigen::Index c = 0; c < data.channels(); ++c) {
      std::snprintf(num, sizeof num, ",%.17g", data.samples(c, static_cast<Eigen::Index>(i)));
      text += num;
    }
    text += '\n';
  }

  if (ends_with(path, ".gz")) {
    // fixed header fields (no name, mtime 0) keep the output byte-stable
    gzFile f = gzopen(path.c_str(), "wb6");
    if (!f) fail(ErrorKind::IoError, "cannot open " + path + " for writing");
    const int written = gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
    const int rc = gzclose(f);
    if (written != static_cast<int>(text.size()) || rc != Z_OK) fail(ErrorKind::IoError, "failed writing " + path);
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IoError, "cannot open " + path + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) fail(ErrorKind::IoError, "failed writing " + path);
  }
}

}  // namespace dlroc
