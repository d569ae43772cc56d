#include "ocl/stream.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "ocl/errors.hpp"
#include "wire.hpp"

namespace ocl {

void save_dataset(const Dataset& ds, const std::string& path) {
  const std::size_t n = ds.features.rows();
  if (ds.labels.size() != n) {
    throw ShapeMismatch("save_dataset: label count does not match feature rows");
  }
  std::string bytes;
  bytes += "OCLD";
  wire::put_u8(bytes, 1);
  wire::put_u32(bytes, static_cast<std::uint32_t>(n));
  wire::put_u32(bytes, static_cast<std::uint32_t>(ds.features.cols()));
  wire::put_u32(bytes, static_cast<std::uint32_t>(ds.num_classes));
  for (double v : ds.features.data()) wire::put_f64(bytes, v);
  for (int y : ds.labels) wire::put_u16(bytes, static_cast<std::uint16_t>(y));
  wire::write_file(path, bytes);
}

Dataset load_dataset(const std::string& path) {
  const std::string bytes = wire::read_file(path);
  wire::Reader r(bytes, path);
  r.expect_magic("OCLD");
  const std::uint8_t version = r.u8();
  if (version != 1) throw BadMagic(path + ": unsupported dataset version");
  const std::uint32_t n = r.u32();
  const std::uint32_t d = r.u32();
  const std::uint32_t c = r.u32();
  if (n == 0 || d == 0 || c == 0) {
    throw TruncatedFile(path + ": empty dataset (n=" + std::to_string(n) + ", d=" +
                        std::to_string(d) + ", C=" + std::to_string(c) + ")");
  }
  Dataset ds;
  ds.num_classes = static_cast<int>(c);
  ds.features = Matrix(n, d);
  for (double& v : ds.features.data()) v = r.f64();
  ds.labels.resize(n);
  for (int& y : ds.labels) {
    y = static_cast<int>(r.u16());
    if (y >= ds.num_classes) {
      throw LabelOutOfRange(path + ": label " + std::to_string(y) + " >= C=" +
                            std::to_string(ds.num_classes));
    }
  }
  r.require_end();
  return ds;
}

namespace {

double pairwise_min_distance(const std::vector<std::vector<double>>& points) {
  double min_dist = 1e300;
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < points[a].size(); ++i) {
        const double diff = points[a][i] - points[b][i];
        d2 += diff * diff;
      }
      min_dist = std::min(min_dist, std::sqrt(d2));
    }
  }
  return min_dist;
}

// Cluster centers with pairwise distance >= separation. When the classes
// fit a regular simplex (classes <= dim + 1) every pairwise distance equals
// the separation exactly, under a random rotation; otherwise a random
// Gaussian configuration is rescaled so its minimum pairwise distance hits
// the separation. Zero separation collapses every center onto the origin.
std::vector<std::vector<double>> synthetic_centers(std::size_t classes, std::size_t dim,
                                                   double separation, Rng& rng) {
  std::vector<std::vector<double>> centers(classes, std::vector<double>(dim, 0.0));
  if (separation == 0.0 || classes < 2) return centers;

  if (classes <= dim + 1) {
    // Regular simplex with unit-basis construction in R^(classes-1):
    // e_0 .. e_(C-2) plus beta * (1, ..., 1), all pairwise sqrt(2) apart.
    const std::size_t m = classes - 1;
    std::vector<std::vector<double>> v(classes, std::vector<double>(m, 0.0));
    for (std::size_t k = 0; k < m; ++k) v[k][k] = 1.0;
    const double beta = (1.0 + std::sqrt(static_cast<double>(classes))) /
                        static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) v[m][i] = beta;
    // Center on the origin and scale the edge length to the separation.
    const double scale = separation / std::sqrt(2.0);
    for (std::size_t i = 0; i < m; ++i) {
      double mean = 0.0;
      for (std::size_t k = 0; k < classes; ++k) mean += v[k][i];
      mean /= static_cast<double>(classes);
      for (std::size_t k = 0; k < classes; ++k) v[k][i] = (v[k][i] - mean) * scale;
    }
    // Random orthonormal frame (Gram-Schmidt on Gaussian draws) embeds the
    // simplex into the feature space at a seed-dependent orientation.
    std::vector<std::vector<double>> frame;
    while (frame.size() < m) {
      std::vector<double> q(dim);
      for (double& x : q) x = rng.normal();
      for (const auto& prev : frame) {
        double proj = 0.0;
        for (std::size_t i = 0; i < dim; ++i) proj += q[i] * prev[i];
        for (std::size_t i = 0; i < dim; ++i) q[i] -= proj * prev[i];
      }
      double norm = 0.0;
      for (double x : q) norm += x * x;
      norm = std::sqrt(norm);
      if (norm < 1e-8) continue;  // re-draw a (nearly) dependent vector
      for (double& x : q) x /= norm;
      frame.push_back(std::move(q));
    }
    for (std::size_t k = 0; k < classes; ++k) {
      for (std::size_t i = 0; i < dim; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += v[k][j] * frame[j][i];
        centers[k][i] = s;
      }
    }
    return centers;
  }

  // More classes than a simplex can hold: rescale a Gaussian configuration.
  double min_dist = 0.0;
  while (min_dist <= 1e-9) {
    for (auto& c : centers) {
      for (double& x : c) x = rng.normal();
    }
    min_dist = pairwise_min_distance(centers);
  }
  const double scale = separation / min_dist;
  for (auto& c : centers) {
    for (double& x : c) x *= scale;
  }
  return centers;
}

}  // namespace

Dataset make_synthetic(std::size_t classes, std::size_t per_class, std::size_t dim,
                       double separation, Rng& rng) {
  if (classes == 0 || per_class == 0 || dim == 0) {
    throw ConfigError("make_synthetic: counts must be positive");
  }
  if (separation < 0.0) throw ConfigError("make_synthetic: separation must be >= 0");

  const std::vector<std::vector<double>> centers =
      synthetic_centers(classes, dim, separation, rng);

  Dataset ds;
  ds.num_classes = static_cast<int>(classes);
  ds.features = Matrix(classes * per_class, dim);
  ds.labels.resize(classes * per_class);
  std::size_t row = 0;
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t s = 0; s < per_class; ++s, ++row) {
      double* out = ds.features.row_ptr(row);
      for (std::size_t i = 0; i < dim; ++i) out[i] = centers[k][i] + rng.normal();
      ds.labels[row] = static_cast<int>(k);
    }
  }
  return ds;
}

TaskSpec split_class_incremental(const Dataset& ds, std::size_t num_tasks,
                                 std::size_t classes_per_task, Rng& rng) {
  if (num_tasks == 0 || classes_per_task == 0) {
    throw ConfigError("split_class_incremental: counts must be positive");
  }
  const std::size_t needed = num_tasks * classes_per_task;
  if (needed > static_cast<std::size_t>(ds.num_classes)) {
    throw TooManyTasks("split_class_incremental: " + std::to_string(needed) +
                       " classes requested, dataset has " +
                       std::to_string(ds.num_classes));
  }
  std::vector<int> order(ds.num_classes);
  for (int i = 0; i < ds.num_classes; ++i) order[i] = i;
  rng.shuffle(order);

  TaskSpec spec;
  spec.kind = TaskKind::class_incremental;
  for (std::size_t t = 0; t < num_tasks; ++t) {
    spec.class_subsets.emplace_back(order.begin() + t * classes_per_task,
                                    order.begin() + (t + 1) * classes_per_task);
  }
  return spec;
}

std::vector<double> domain_schedule(TransformKind kind) {
  switch (kind) {
    case TransformKind::noise:
      return {0.0, 0.4, 0.8, 1.2, 1.6, 2.0, 2.4, 2.8, 3.2, 3.6};
    case TransformKind::occlusion:
      return {0.0, 0.07, 0.13, 0.2, 0.27, 0.33, 0.4, 0.47, 0.53, 0.6};
    case TransformKind::blur:
      return {0.0, 0.28, 0.56, 0.83, 1.11, 1.39, 1.67, 1.94, 2.22, 2.5};
  }
  throw UnknownKind("domain_schedule: unknown transform kind");
}

namespace {

void require_geometry(const Matrix& x, std::size_t width, const char* kind) {
  if (width == 0 || width * width != x.cols()) {
    throw GeometryUnknown(std::string(kind) + " needs flattened square images; " +
                          "got width " + std::to_string(width) + " for " +
                          std::to_string(x.cols()) + " columns");
  }
}

}  // namespace

Matrix apply_nonstationarity(const Matrix& x, TransformKind kind, double strength,
                             std::size_t image_width, Rng& rng) {
  if (strength < 0.0) throw ConfigError("apply_nonstationarity: strength must be >= 0");
  if (strength == 0.0) return x;

  switch (kind) {
    case TransformKind::noise: {
      Matrix out = x;
      for (double& v : out.data()) v += strength * rng.normal();
      return out;
    }
    case TransformKind::occlusion: {
      require_geometry(x, image_width, "occlusion");
      const std::size_t w = image_width;
      const std::size_t side =
          std::min<std::size_t>(w, static_cast<std::size_t>(std::llround(strength * w)));
      Matrix out = x;
      if (side == 0) return out;
      for (std::size_t img = 0; img < x.rows(); ++img) {
        const std::size_t r0 = rng.uniform_index(w - side + 1);
        const std::size_t c0 = rng.uniform_index(w - side + 1);
        double* row = out.row_ptr(img);
        for (std::size_t r = r0; r < r0 + side; ++r) {
          for (std::size_t c = c0; c < c0 + side; ++c) row[r * w + c] = 0.0;
        }
      }
      return out;
    }
    case TransformKind::blur: {
      require_geometry(x, image_width, "blur");
      const std::size_t w = image_width;
      const std::size_t width =
          1 + static_cast<std::size_t>(std::llround(strength * 2.0));
      if (width <= 1) return x;
      Matrix out(x.rows(), x.cols());
      for (std::size_t img = 0; img < x.rows(); ++img) {
        const double* in = x.row_ptr(img);
        double* o = out.row_ptr(img);
        for (std::size_t r = 0; r < w; ++r) {
          for (std::size_t i = 0; i < w; ++i) {
            // Window [i - k/2, i - k/2 + k) clamped to the row, renormalized.
            const long start = static_cast<long>(i) - static_cast<long>(width / 2);
            const std::size_t lo = start > 0 ? static_cast<std::size_t>(start) : 0;
            const std::size_t hi =
                std::min<long>(static_cast<long>(w), start + static_cast<long>(width));
            double sum = 0.0;
            for (std::size_t j = lo; j < hi; ++j) sum += in[r * w + j];
            o[r * w + i] = sum / static_cast<double>(hi - lo);
          }
        }
      }
      return out;
    }
  }
  throw UnknownKind("apply_nonstationarity: unknown transform kind");
}

namespace {

void validate_spec(const Dataset& ds, const TaskSpec& spec) {
  if (spec.batch_size == 0) throw SpecMismatch("batch_size must be positive");
  if (spec.kind == TaskKind::class_incremental) {
    if (spec.class_subsets.empty()) {
      throw SpecMismatch("class-incremental spec has no class subsets");
    }
    std::set<int> seen;
    for (const auto& subset : spec.class_subsets) {
      if (subset.empty()) throw SpecMismatch("empty class subset");
      for (int c : subset) {
        if (c < 0 || c >= ds.num_classes) {
          throw SpecMismatch("class " + std::to_string(c) + " outside [0, " +
                             std::to_string(ds.num_classes) + ")");
        }
        if (!seen.insert(c).second) {
          throw SpecMismatch("class " + std::to_string(c) + " appears in two subsets");
        }
      }
    }
  } else {
    if (spec.strengths.empty()) {
      throw SpecMismatch("domain-incremental spec has no strength schedule");
    }
    for (std::size_t t = 1; t < spec.strengths.size(); ++t) {
      if (spec.strengths[t] < spec.strengths[t - 1]) {
        throw SpecMismatch("strength schedule must be nondecreasing");
      }
    }
    if (spec.strengths.size() > ds.features.rows()) {
      throw SpecMismatch("more tasks than examples");
    }
  }
}

TaskData gather_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
  TaskData task;
  task.x = Matrix(rows.size(), ds.features.cols());
  task.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    task.x.set_row(i, ds.features.row(rows[i]));
    task.labels[i] = ds.labels[rows[i]];
  }
  return task;
}

}  // namespace

std::vector<TaskData> build_tasks(const Dataset& ds, const TaskSpec& spec, const Rng& rng) {
  validate_spec(ds, spec);
  std::vector<TaskData> tasks;

  if (spec.kind == TaskKind::class_incremental) {
    for (const auto& subset : spec.class_subsets) {
      const std::set<int> members(subset.begin(), subset.end());
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < ds.features.rows(); ++i) {
        if (members.count(ds.labels[i])) rows.push_back(i);
      }
      if (rows.empty()) throw SpecMismatch("a task's class subset matches no examples");
      tasks.push_back(gather_rows(ds, rows));
    }
    return tasks;
  }

  // Domain-incremental: disjoint example subsets, one per strength step.
  const std::size_t n = ds.features.rows();
  const std::size_t num_tasks = spec.strengths.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng assign = rng.child(kStreamTagAssign);
  assign.shuffle(order);

  const std::size_t base = n / num_tasks;
  const std::size_t extra = n % num_tasks;
  std::size_t offset = 0;
  for (std::size_t t = 0; t < num_tasks; ++t) {
    const std::size_t count = base + (t < extra ? 1 : 0);
    if (count == 0) throw SpecMismatch("task " + std::to_string(t) + " would be empty");
    const std::vector<std::size_t> rows(order.begin() + offset,
                                        order.begin() + offset + count);
    offset += count;
    TaskData task = gather_rows(ds, rows);
    Rng transform_rng = rng.child(kStreamTagTransformBase + t);
    task.x = apply_nonstationarity(task.x, spec.transform, spec.strengths[t],
                                   spec.image_width, transform_rng);
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::vector<StreamBatch> stream_batches_from(const std::vector<TaskData>& tasks,
                                             const std::vector<std::vector<std::size_t>>& rows,
                                             std::size_t batch_size, const Rng& rng) {
  if (rows.size() != tasks.size()) {
    throw SpecMismatch("stream_batches_from: row selection does not match task count");
  }
  std::vector<StreamBatch> out;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (rows[t].empty()) {
      throw SpecMismatch("stream_batches_from: task " + std::to_string(t) +
                         " has no examples to stream");
    }
    std::vector<std::size_t> order = rows[t];
    Rng shuffle_rng = rng.child(kStreamTagShuffleBase + t);
    shuffle_rng.shuffle(order);
    for (std::size_t i = 0; i < order.size(); i += batch_size) {
      const std::size_t count = std::min(batch_size, order.size() - i);
      StreamBatch batch;
      batch.task_index = t;
      batch.is_task_boundary = (i == 0);
      batch.x = Matrix(count, tasks[t].x.cols());
      batch.labels.resize(count);
      for (std::size_t j = 0; j < count; ++j) {
        batch.x.set_row(j, tasks[t].x.row(order[i + j]));
        batch.labels[j] = tasks[t].labels[order[i + j]];
      }
      out.push_back(std::move(batch));
    }
  }
  return out;
}

std::vector<StreamBatch> stream_batches(const Dataset& ds, const TaskSpec& spec,
                                        const Rng& rng) {
  const std::vector<TaskData> tasks = build_tasks(ds, spec, rng);
  std::vector<std::vector<std::size_t>> all_rows(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    all_rows[t].resize(tasks[t].size());
    for (std::size_t i = 0; i < tasks[t].size(); ++i) all_rows[t][i] = i;
  }
  return stream_batches_from(tasks, all_rows, spec.batch_size, rng);
}

}  // namespace ocl
