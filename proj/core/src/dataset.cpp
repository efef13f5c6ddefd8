// SPDX-License-Identifier: Apache-2.0
#include "swaplab/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "swaplab/error.hpp"
#include "swaplab/util.hpp"

namespace swaplab {

void Dataset::validate() const {
  check(size() >= 1, "dataset: must contain at least one sample");
  check(labels.size() == size(), "dataset: label count != sample count");
  check(class_count >= 2, "dataset: class_count must be >= 2");
  for (int y : labels) check(y >= 0 && y < class_count, "dataset: label out of range");
  check(all_finite(features), "dataset: non-finite feature value");
}

Batch gather(const Dataset& data, std::span<const int> indices) {
  Batch b;
  b.inputs = Matrix(indices.size(), data.features.cols);
  b.labels.resize(indices.size());
  for (size_t i = 0; i < indices.size(); ++i) {
    int src = indices[i];
    std::copy_n(data.features.row(static_cast<size_t>(src)), data.features.cols,
                b.inputs.row(i));
    b.labels[i] = data.labels[static_cast<size_t>(src)];
  }
  return b;
}

SyntheticKind synthetic_kind_from_string(const std::string& s) {
  if (s == "gaussian_blobs") return SyntheticKind::kGaussianBlobs;
  if (s == "two_spirals") return SyntheticKind::kTwoSpirals;
  throw ParseError("unknown synthetic dataset kind: " + s);
}

Dataset generate_synthetic(SyntheticKind kind, int n, int d, int classes, double noise,
                           uint64_t seed) {
  check(n >= classes, "generate_synthetic: n must be >= classes");
  check(classes >= 2, "generate_synthetic: classes must be >= 2");
  check(d >= 1, "generate_synthetic: d must be >= 1");
  check(noise >= 0.0, "generate_synthetic: noise must be >= 0");

  Dataset data;
  data.features = Matrix(static_cast<size_t>(n), static_cast<size_t>(d));
  data.labels.resize(static_cast<size_t>(n));
  data.class_count = classes;

  if (kind == SyntheticKind::kGaussianBlobs) {
    RngStream rng(seed, "data/gaussian_blobs");
    Matrix centroids(static_cast<size_t>(classes), static_cast<size_t>(d));
    for (auto& c : centroids.data) c = rng.next_uniform(-4.0, 4.0);
    for (int i = 0; i < n; ++i) {
      int y = i % classes;  // balanced within one sample
      data.labels[static_cast<size_t>(i)] = y;
      double* row = data.features.row(static_cast<size_t>(i));
      const double* c = centroids.row(static_cast<size_t>(y));
      for (int j = 0; j < d; ++j) row[j] = c[j] + noise * rng.next_normal();
    }
    data.provenance = {"gaussian_blobs",
                       "n=" + std::to_string(n) + ",d=" + std::to_string(d) +
                           ",classes=" + std::to_string(classes) + ",noise=" + fmt_double(noise),
                       seed,
                       ""};
  } else {
    check(d == 2, "two_spirals: d must be 2");
    check(classes == 2, "two_spirals: classes must be 2");
    RngStream rng(seed, "data/two_spirals");
    for (int i = 0; i < n; ++i) {
      int y = i % 2;
      data.labels[static_cast<size_t>(i)] = y;
      // 1.5 turns per arm, radius growing with the angle.
      double t = rng.next_double() * 3.0 * M_PI;
      double r = 0.5 + t / (3.0 * M_PI) * 3.5;
      double phase = y == 0 ? 0.0 : M_PI;
      double* row = data.features.row(static_cast<size_t>(i));
      row[0] = r * std::cos(t + phase) + noise * rng.next_normal();
      row[1] = r * std::sin(t + phase) + noise * rng.next_normal();
    }
    data.provenance = {"two_spirals",
                       "n=" + std::to_string(n) + ",noise=" + fmt_double(noise), seed, ""};
  }
  data.validate();
  return data;
}

namespace {

double parse_double_field(const std::string& field, const std::string& path, size_t line) {
  double v = 0.0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e)
    throw ParseError(path + ":" + std::to_string(line) + ": malformed numeric field '" +
                     field + "'");
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open csv file: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  size_t line_no = 0;
  size_t width = 0;  // column count, fixed by the header (or the first row)
  bool skipped_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) fields.push_back(cur);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (schema.has_header && !skipped_header) {
      skipped_header = true;
      width = fields.size();
      continue;
    }
    if (fields.size() < 2)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": need at least one feature column and a label column");
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(width) + " columns, got " + std::to_string(fields.size()));
    std::vector<double> vals(width);
    for (size_t i = 0; i < width; ++i) vals[i] = parse_double_field(fields[i], path, line_no);
    double lab = vals.back();
    if (lab != std::floor(lab))
      throw ParseError(path + ":" + std::to_string(line_no) + ": label column must be integer");
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");

  Dataset data;
  size_t n = rows.size();
  size_t d = width - 1;
  data.features = Matrix(n, d);
  data.labels.resize(n);
  int max_label = 0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < d; ++j) data.features(i, j) = rows[i][j];
    data.labels[i] = static_cast<int>(rows[i][d]);
    if (data.labels[i] < 0)
      throw ParseError(path + ": negative label in row " + std::to_string(i));
    max_label = std::max(max_label, data.labels[i]);
  }
  data.class_count = schema.class_count > 0 ? schema.class_count : max_label + 1;
  if (schema.class_count > 0 && max_label >= schema.class_count)
    throw ParseError(path + ": label " + std::to_string(max_label) +
                     " out of range for class_count " + std::to_string(schema.class_count));
  data.provenance = {"csv", path, 0, hash_hex(hash_file(path))};
  data.validate();
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open csv file for writing: " + path);
  for (size_t j = 0; j < data.features.cols; ++j) out << "f" << j << ",";
  out << "label\n";
  for (size_t i = 0; i < data.size(); ++i) {
    const double* row = data.features.row(i);
    for (size_t j = 0; j < data.features.cols; ++j) out << fmt_double(row[j]) << ",";
    out << data.labels[i] << "\n";
  }
}

namespace {

uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ParseError(path + ": truncated idx header");
  return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw ParseError("cannot open idx images file: " + images_path);
  uint32_t magic = read_be32(img, images_path);
  if (magic != 0x00000803)
    throw ParseError(images_path + ": bad idx image magic " + std::to_string(magic));
  uint32_t n = read_be32(img, images_path);
  uint32_t rows = read_be32(img, images_path);
  uint32_t cols = read_be32(img, images_path);
  size_t d = static_cast<size_t>(rows) * cols;
  std::vector<unsigned char> pixels(static_cast<size_t>(n) * d);
  img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!img) throw ParseError(images_path + ": truncated idx pixel data");

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw ParseError("cannot open idx labels file: " + labels_path);
  uint32_t lmagic = read_be32(lab, labels_path);
  if (lmagic != 0x00000801)
    throw ParseError(labels_path + ": bad idx label magic " + std::to_string(lmagic));
  uint32_t ln = read_be32(lab, labels_path);
  if (ln != n)
    throw ParseError(labels_path + ": label count " + std::to_string(ln) +
                     " != image count " + std::to_string(n));
  std::vector<unsigned char> raw_labels(ln);
  lab.read(reinterpret_cast<char*>(raw_labels.data()), static_cast<std::streamsize>(ln));
  if (!lab) throw ParseError(labels_path + ": truncated idx label data");

  Dataset data;
  data.features = Matrix(n, d);
  data.labels.resize(n);
  for (size_t i = 0; i < n; ++i) {
    double* row = data.features.row(i);
    for (size_t j = 0; j < d; ++j) row[j] = pixels[i * d + j] / 255.0;
    data.labels[i] = raw_labels[i];
  }
  int max_label = 0;
  for (int y : data.labels) max_label = std::max(max_label, y);
  data.class_count = max_label + 1;
  uint64_t h = hash_file(images_path) ^ (hash_file(labels_path) * 0x100000001b3ULL);
  data.provenance = {"idx", images_path + ";" + labels_path, 0, hash_hex(h)};
  data.validate();
  return data;
}

void standardize_features(Dataset& train, Dataset* test) {
  size_t d = train.features.cols;
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  size_t n = train.size();
  for (size_t i = 0; i < n; ++i) {
    const double* row = train.features.row(i);
    for (size_t j = 0; j < d; ++j) mean[j] += row[j];
  }
  for (size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    const double* row = train.features.row(i);
    for (size_t j = 0; j < d; ++j) {
      double c = row[j] - mean[j];
      var[j] += c * c;
    }
  }
  std::vector<double> inv_std(d);
  for (size_t j = 0; j < d; ++j) {
    var[j] /= static_cast<double>(n);
    inv_std[j] = var[j] > 0.0 ? 1.0 / std::sqrt(var[j]) : 1.0;
  }
  auto apply = [&](Dataset& ds) {
    for (size_t i = 0; i < ds.size(); ++i) {
      double* row = ds.features.row(i);
      for (size_t j = 0; j < d; ++j) row[j] = (row[j] - mean[j]) * inv_std[j];
    }
  };
  apply(train);
  if (test) {
    check(test->features.cols == d, "standardize: train/test dimension mismatch");
    apply(*test);
  }
}

std::span<const int> BatchPlan::batch_indices(int b) const {
  const auto& [begin, end] = batches[static_cast<size_t>(b)];
  return {permutation.data() + begin, static_cast<size_t>(end - begin)};
}

int BatchPlan::full_super_batches() const {
  return static_cast<int>(permutation.size()) / batch_size;
}

std::span<const int> BatchPlan::shard_indices(int sb, int worker_count, int worker_id) const {
  check(batch_size % worker_count == 0, "shard_indices: batch size not divisible by workers");
  check(sb >= 0 && sb < full_super_batches(), "shard_indices: super-batch out of range");
  check(worker_id >= 0 && worker_id < worker_count, "shard_indices: worker id out of range");
  int shard = batch_size / worker_count;
  int begin = sb * batch_size + worker_id * shard;
  return {permutation.data() + begin, static_cast<size_t>(shard)};
}

BatchPlan epoch_batches(const Dataset& data, int batch_size, RngStream& rng,
                        std::optional<ShardSpec> shard) {
  int n = static_cast<int>(data.size());
  check(batch_size >= 1 && batch_size <= n,
        "epoch_batches: batch_size must be in [1, dataset size]");
  BatchPlan plan;
  plan.batch_size = batch_size;
  plan.permutation.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) plan.permutation[static_cast<size_t>(i)] = i;
  rng.shuffle(plan.permutation);

  if (shard) {
    check(shard->worker_count >= 1, "epoch_batches: worker_count must be >= 1");
    check(batch_size % shard->worker_count == 0,
          "epoch_batches: batch_size must be divisible by worker_count");
    check(shard->worker_id >= 0 && shard->worker_id < shard->worker_count,
          "epoch_batches: worker_id out of range");
    int shard_size = batch_size / shard->worker_count;
    int full = n / batch_size;  // trailing partial super-batch dropped
    for (int sb = 0; sb < full; ++sb) {
      int begin = sb * batch_size + shard->worker_id * shard_size;
      plan.batches.emplace_back(begin, begin + shard_size);
    }
  } else {
    for (int begin = 0; begin < n; begin += batch_size) {
      plan.batches.emplace_back(begin, std::min(begin + batch_size, n));
    }
  }
  return plan;
}

uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file for hashing: " + path);
  char buf[1 << 16];
  uint64_t h = 0xcbf29ce484222325ULL;
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace swaplab
