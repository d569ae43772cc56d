#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "ocl/errors.hpp"
#include "ocl/stream.hpp"
#include "test_util.hpp"

using namespace ocl;
using test_util::max_abs_diff;

namespace {

std::string read_bytes(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  REQUIRE(f != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

}  // namespace

TEST_CASE("dataset file round trip is bit-identical") {
  Rng rng(1);
  const Dataset ds = make_synthetic(3, 5, 4, 2.0, rng);
  const std::string p1 = test_util::temp_file("ds1.ocld");
  const std::string p2 = test_util::temp_file("ds2.ocld");
  save_dataset(ds, p1);
  const Dataset loaded = load_dataset(p1);
  CHECK(loaded.features == ds.features);
  CHECK(loaded.labels == ds.labels);
  CHECK(loaded.num_classes == ds.num_classes);

  // Writing the loaded dataset reproduces the original bytes: the format is
  // a pure function of the contents, so its checksum is stable.
  save_dataset(loaded, p2);
  CHECK(read_bytes(p1) == read_bytes(p2));
}

TEST_CASE("dataset loader rejects malformed files") {
  const std::string path = test_util::temp_file("bad.ocld");
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("WRNG", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_dataset(path), BadMagic);

  // A header that declares zero examples is a truncation-class error.
  {
    std::string bytes = "OCLD";
    bytes.push_back(1);                      // version
    for (int i = 0; i < 12; ++i) bytes.push_back(0);  // n = d = C = 0
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fwrite(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_dataset(path), TruncatedFile);

  // Valid header, missing payload.
  {
    std::string bytes = "OCLD";
    bytes.push_back(1);
    const unsigned char header[] = {2, 0, 0, 0, 3, 0, 0, 0, 2, 0, 0, 0};
    bytes.append(reinterpret_cast<const char*>(header), sizeof(header));
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fwrite(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_dataset(path), TruncatedFile);
}

TEST_CASE("make_synthetic: zero separation puts every center at the origin") {
  Rng rng(2);
  const Dataset ds = make_synthetic(4, 500, 3, 0.0, rng);
  for (int cls = 0; cls < 4; ++cls) {
    std::vector<double> mean(3, 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < ds.features.rows(); ++i) {
      if (ds.labels[i] != cls) continue;
      for (std::size_t c = 0; c < 3; ++c) mean[c] += ds.features(i, c);
      ++count;
    }
    CHECK(count == 500);
    for (double m : mean) CHECK(std::abs(m / count) < 0.2);
  }
}

TEST_CASE("make_synthetic: wide separation is linearly separable") {
  Rng rng(3);
  const Dataset ds = make_synthetic(3, 200, 2, 20.0, rng);
  // Nearest-class-mean probe (a linear classifier) on the raw features.
  std::vector<std::vector<double>> means(3, std::vector<double>(2, 0.0));
  std::vector<std::size_t> counts(3, 0);
  for (std::size_t i = 0; i < ds.features.rows(); ++i) {
    for (std::size_t c = 0; c < 2; ++c) means[ds.labels[i]][c] += ds.features(i, c);
    counts[ds.labels[i]] += 1;
  }
  for (int k = 0; k < 3; ++k) {
    for (double& v : means[k]) v /= counts[k];
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.features.rows(); ++i) {
    int best = 0;
    double best_d = 1e300;
    for (int k = 0; k < 3; ++k) {
      double d = 0.0;
      for (std::size_t c = 0; c < 2; ++c) {
        d += (ds.features(i, c) - means[k][c]) * (ds.features(i, c) - means[k][c]);
      }
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    if (best == ds.labels[i]) ++correct;
  }
  CHECK(double(correct) / ds.features.rows() > 0.99);
}

TEST_CASE("make_synthetic is deterministic in the seed") {
  Rng a(7), b(7);
  const Dataset d1 = make_synthetic(3, 10, 4, 2.5, a);
  const Dataset d2 = make_synthetic(3, 10, 4, 2.5, b);
  CHECK(d1.features == d2.features);
  CHECK(d1.labels == d2.labels);
}

TEST_CASE("split_class_incremental partitions the classes") {
  Rng rng(4);
  Dataset ds;
  ds.num_classes = 100;
  ds.features = Matrix(100, 1);
  ds.labels.resize(100);
  for (int i = 0; i < 100; ++i) ds.labels[i] = i;

  const TaskSpec spec = split_class_incremental(ds, 20, 5, rng);
  CHECK(spec.class_subsets.size() == 20);
  std::set<int> seen;
  for (const auto& subset : spec.class_subsets) {
    CHECK(subset.size() == 5);
    for (int c : subset) CHECK(seen.insert(c).second);
  }
  CHECK(seen.size() == 100);

  // Degenerate single-task split covers everything at once.
  Rng rng2(5);
  const TaskSpec one = split_class_incremental(ds, 1, 100, rng2);
  CHECK(one.class_subsets.size() == 1);
  CHECK(one.class_subsets[0].size() == 100);

  // Two seeds: same subset-size multiset, (almost surely) different order.
  Rng ra(6), rb(7);
  const TaskSpec sa = split_class_incremental(ds, 10, 10, ra);
  const TaskSpec sb = split_class_incremental(ds, 10, 10, rb);
  CHECK(sa.class_subsets.size() == sb.class_subsets.size());
  CHECK(sa.class_subsets[0] != sb.class_subsets[0]);

  Rng rng3(8);
  CHECK_THROWS_AS(split_class_incremental(ds, 21, 5, rng3), TooManyTasks);
}

TEST_CASE("domain_schedule matches the fixed strength lists") {
  const std::vector<double> noise = {0.0, 0.4, 0.8, 1.2, 1.6, 2.0, 2.4, 2.8, 3.2, 3.6};
  const std::vector<double> occlusion = {0.0, 0.07, 0.13, 0.2, 0.27,
                                         0.33, 0.4, 0.47, 0.53, 0.6};
  const std::vector<double> blur = {0.0, 0.28, 0.56, 0.83, 1.11,
                                    1.39, 1.67, 1.94, 2.22, 2.5};
  CHECK(domain_schedule(TransformKind::noise) == noise);
  CHECK(domain_schedule(TransformKind::occlusion) == occlusion);
  CHECK(domain_schedule(TransformKind::blur) == blur);
  for (TransformKind k :
       {TransformKind::noise, TransformKind::occlusion, TransformKind::blur}) {
    const std::vector<double> s = domain_schedule(k);
    CHECK(s.size() == 10);
    CHECK(s.front() == 0.0);
    CHECK(std::is_sorted(s.begin(), s.end()));
  }
}

TEST_CASE("apply_nonstationarity: zero strength is the identity") {
  Rng rng(9);
  const Matrix x = test_util::random_matrix(3, 16, rng);
  for (TransformKind k :
       {TransformKind::noise, TransformKind::occlusion, TransformKind::blur}) {
    Rng t(1);
    CHECK(max_abs_diff(apply_nonstationarity(x, k, 0.0, 4, t), x) == 0.0);
  }
}

TEST_CASE("apply_nonstationarity: full occlusion blanks the image") {
  Rng rng(10);
  const Matrix x = test_util::random_matrix(2, 9, rng);
  Rng t(2);
  const Matrix out = apply_nonstationarity(x, TransformKind::occlusion, 1.0, 3, t);
  CHECK(test_util::max_abs(out) == 0.0);
}

TEST_CASE("apply_nonstationarity: occlusion only touches the chosen square") {
  Rng rng(11);
  const Matrix x = test_util::random_matrix(4, 36, rng);
  Rng t(3);
  const Matrix out = apply_nonstationarity(x, TransformKind::occlusion, 0.34, 6, t);
  // side = round(0.34 * 6) = 2, so exactly 4 pixels per image are zeroed and
  // every other pixel is untouched.
  for (std::size_t img = 0; img < 4; ++img) {
    std::size_t changed = 0;
    for (std::size_t c = 0; c < 36; ++c) {
      if (out(img, c) != x(img, c)) {
        ++changed;
        CHECK(out(img, c) == 0.0);
      }
    }
    CHECK(changed <= 4);  // overwritten pixels that were already 0 don't count
  }
}

TEST_CASE("apply_nonstationarity: noise adds the expected variance") {
  Rng rng(12);
  const Matrix x(1, 1000, 0.0);
  Rng t(4);
  const Matrix out = apply_nonstationarity(x, TransformKind::noise, 0.4, 0, t);
  double var = 0.0;
  for (double v : out.data()) var += v * v;
  var /= out.size();
  CHECK(std::abs(var - 0.16) < 0.016);  // within 10%
}

TEST_CASE("apply_nonstationarity: blur averages rows and keeps constants") {
  Matrix x(1, 9, 3.5);
  Rng t(5);
  const Matrix constant = apply_nonstationarity(x, TransformKind::blur, 1.0, 3, t);
  for (double v : constant.data()) CHECK(v == doctest::Approx(3.5).epsilon(1e-15));

  // width = 1 + round(2 * 0.5) = 2 on a 2x2 image: each image row blurs
  // independently with clamped, renormalized windows.
  Matrix ramp(1, 4);
  ramp.set_row(0, {0.0, 1.0, 2.0, 3.0});
  Rng t2(6);
  const Matrix blurred = apply_nonstationarity(ramp, TransformKind::blur, 0.5, 2, t2);
  CHECK(blurred(0, 0) == doctest::Approx(0.0));  // clamped window {0}
  CHECK(blurred(0, 1) == doctest::Approx(0.5));  // window {0, 1}
  CHECK(blurred(0, 2) == doctest::Approx(2.0));  // second image row, window {2}
  CHECK(blurred(0, 3) == doctest::Approx(2.5));  // window {2, 3}
}

TEST_CASE("apply_nonstationarity requires geometry for occlusion and blur") {
  const Matrix x(2, 10);
  Rng t(7);
  CHECK_THROWS_AS(apply_nonstationarity(x, TransformKind::blur, 1.0, 0, t),
                  GeometryUnknown);
  CHECK_THROWS_AS(apply_nonstationarity(x, TransformKind::occlusion, 0.5, 3, t),
                  GeometryUnknown);
}

TEST_CASE("stream_batches: single task, single batch") {
  Rng rng(13);
  const Dataset ds = make_synthetic(2, 5, 3, 1.0, rng);
  TaskSpec spec;
  spec.kind = TaskKind::class_incremental;
  spec.class_subsets = {{0, 1}};
  spec.batch_size = 10;
  const auto batches = stream_batches(ds, spec, Rng(1));
  REQUIRE(batches.size() == 1);
  CHECK(batches[0].labels.size() == 10);
  CHECK(batches[0].is_task_boundary);
  CHECK(batches[0].task_index == 0);
}

TEST_CASE("stream_batches conserves every example exactly once") {
  Rng rng(14);
  const Dataset ds = make_synthetic(4, 13, 3, 2.0, rng);
  TaskSpec spec;
  spec.kind = TaskKind::class_incremental;
  spec.class_subsets = {{2, 0}, {3, 1}};
  spec.batch_size = 4;
  const auto batches = stream_batches(ds, spec, Rng(9));

  std::map<std::size_t, std::size_t> per_task;
  std::multiset<double> emitted;
  for (const auto& b : batches) {
    per_task[b.task_index] += b.labels.size();
    for (std::size_t r = 0; r < b.x.rows(); ++r) emitted.insert(b.x(r, 0));
    // Label purity: every label in the batch belongs to the task's subset.
    for (int y : b.labels) {
      const auto& subset = spec.class_subsets[b.task_index];
      CHECK(std::find(subset.begin(), subset.end(), y) != subset.end());
    }
  }
  CHECK(per_task[0] == 26);
  CHECK(per_task[1] == 26);

  std::multiset<double> expected;
  for (std::size_t i = 0; i < ds.features.rows(); ++i) expected.insert(ds.features(i, 0));
  CHECK(emitted == expected);

  // Boundary flags: exactly one per task, on its first batch.
  std::size_t boundaries = 0;
  for (const auto& b : batches) boundaries += b.is_task_boundary ? 1 : 0;
  CHECK(boundaries == 2);
  CHECK(batches.front().is_task_boundary);
}

TEST_CASE("stream_batches is deterministic in the seed") {
  Rng rng(15);
  const Dataset ds = make_synthetic(4, 10, 3, 2.0, rng);
  TaskSpec spec;
  spec.kind = TaskKind::class_incremental;
  spec.class_subsets = {{0, 1}, {2, 3}};
  spec.batch_size = 3;
  const auto a = stream_batches(ds, spec, Rng(21));
  const auto b = stream_batches(ds, spec, Rng(21));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].labels == b[i].labels);
    CHECK(a[i].task_index == b[i].task_index);
    CHECK(a[i].is_task_boundary == b[i].is_task_boundary);
  }
  const auto c = stream_batches(ds, spec, Rng(22));
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size() && !any_diff; ++i) {
    any_diff = !(a[i].x == c[i].x);
  }
  CHECK(any_diff);
}

TEST_CASE("domain-incremental tasks apply the schedule exactly") {
  Rng rng(16);
  const Dataset ds = make_synthetic(2, 50, 9, 1.0, rng);
  TaskSpec spec;
  spec.kind = TaskKind::domain_incremental;
  spec.transform = TransformKind::noise;
  spec.strengths = {0.0, 0.5, 1.5};
  spec.image_width = 3;
  spec.batch_size = 10;

  const Rng root(77);
  const auto tasks = build_tasks(ds, spec, root);
  REQUIRE(tasks.size() == 3);
  CHECK(tasks[0].size() + tasks[1].size() + tasks[2].size() == 100);

  // Reconstruct each task independently from the documented child tags: the
  // assignment shuffle and the per-task transform streams.
  std::vector<std::size_t> order(100);
  for (std::size_t i = 0; i < 100; ++i) order[i] = i;
  Rng assign = root.child(kStreamTagAssign);
  assign.shuffle(order);
  std::size_t offset = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    const std::size_t count = tasks[t].size();
    Matrix raw(count, 9);
    for (std::size_t i = 0; i < count; ++i) raw.set_row(i, ds.features.row(order[offset + i]));
    offset += count;
    Rng transform_rng = root.child(kStreamTagTransformBase + t);
    const Matrix expected = apply_nonstationarity(raw, spec.transform, spec.strengths[t],
                                                  spec.image_width, transform_rng);
    CHECK(tasks[t].x == expected);
  }

  // Task 0 has strength 0: untouched features.
  for (std::size_t i = 0; i < tasks[0].size(); ++i) {
    CHECK(tasks[0].x.row(i) == ds.features.row(order[i]));
  }
}

TEST_CASE("stream spec validation") {
  Rng rng(17);
  const Dataset ds = make_synthetic(3, 4, 2, 1.0, rng);
  TaskSpec empty;
  empty.kind = TaskKind::class_incremental;
  CHECK_THROWS_AS(stream_batches(ds, empty, Rng(1)), SpecMismatch);

  TaskSpec overlap;
  overlap.class_subsets = {{0, 1}, {1, 2}};
  CHECK_THROWS_AS(stream_batches(ds, overlap, Rng(1)), SpecMismatch);

  TaskSpec decreasing;
  decreasing.kind = TaskKind::domain_incremental;
  decreasing.strengths = {1.0, 0.5};
  CHECK_THROWS_AS(stream_batches(ds, decreasing, Rng(1)), SpecMismatch);
}

TEST_CASE("noise draws differ across seeds but keep the shape") {
  Rng rng(18);
  const Matrix x = test_util::random_matrix(4, 9, rng);
  Rng t1(1), t2(2);
  const Matrix a = apply_nonstationarity(x, TransformKind::noise, 0.5, 0, t1);
  const Matrix b = apply_nonstationarity(x, TransformKind::noise, 0.5, 0, t2);
  CHECK(a.rows() == x.rows());
  CHECK(a.cols() == x.cols());
  CHECK(!(a == b));
}

TEST_CASE("dataset loader rejects labels outside the declared class count") {
  Rng rng(19);
  Dataset ds = make_synthetic(3, 4, 2, 1.0, rng);
  ds.labels[5] = 7;  // beyond C = 3, still representable in the file
  ds.num_classes = 3;
  const std::string path = test_util::temp_file("badlabel.ocld");
  save_dataset(ds, path);
  CHECK_THROWS_AS(load_dataset(path), LabelOutOfRange);
}
