#include "sccsim/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace sccsim {

namespace {

// Accumulates per-block byte overlaps for one task argument.
struct ArgBuilder {
  std::map<std::uint32_t, std::uint64_t> acc;

  void add_range(const SharedRegion& r, const Allocation& a, std::uint64_t off,
                 std::uint64_t len) {
    std::uint64_t bs = r.block_bytes();
    std::uint64_t first = off / bs;
    std::uint64_t last = (off + len - 1) / bs;
    for (std::uint64_t i = first; i <= last; ++i) {
      std::uint64_t lo = std::max(off, i * bs);
      std::uint64_t hi = std::min(off + len, (i + 1) * bs);
      acc[a.block_ids.at(static_cast<std::size_t>(i))] += hi - lo;
    }
  }

  void add_alloc(const SharedRegion& r, const Allocation& a) {
    add_range(r, a, 0, a.bytes);
  }

  TaskArg take(AccessMode mode, const SharedRegion& r) {
    TaskArg arg;
    arg.mode = mode;
    for (auto& [b, n] : acc) {
      arg.blocks.push_back(b);
      arg.bytes.push_back(static_cast<std::uint32_t>(std::min<std::uint64_t>(n, r.block_bytes())));
    }
    acc.clear();
    return arg;
  }
};

void finalize(Workload& w) {
  for (std::size_t i = 0; i < w.tasks.size(); ++i)
    w.tasks[i].task_id = static_cast<std::uint64_t>(i);
}

void note_blocks(Workload& w, const Allocation& a) {
  w.data_blocks.insert(w.data_blocks.end(), a.block_ids.begin(), a.block_ids.end());
}

}  // namespace

Workload gen_blackscholes(std::uint64_t n_options, std::uint64_t options_per_task,
                          AllocMode mode, const Calibration& cal) {
  if (options_per_task == 0 || n_options % options_per_task != 0)
    throw ConfigError("options_per_task must divide n_options");
  constexpr std::uint64_t kOptionBytes = 32;
  constexpr std::uint64_t kResultBytes = 8;

  Workload w;
  w.name = "blackscholes";
  w.region = std::make_shared<SharedRegion>();
  Allocation options = w.region->alloc(n_options * kOptionBytes, mode);
  Allocation results = w.region->alloc(n_options * kResultBytes, mode);
  note_blocks(w, options);
  note_blocks(w, results);

  std::uint64_t n_tasks = n_options / options_per_task;
  std::int64_t cycles = cal.flops_to_cycles(w.name, 200.0 * static_cast<double>(options_per_task));
  ArgBuilder b;
  for (std::uint64_t i = 0; i < n_tasks; ++i) {
    TaskDescriptor t;
    t.fn_tag = kFnBlackScholes;
    t.compute_cycles = cycles;
    b.add_range(*w.region, options, i * options_per_task * kOptionBytes,
                options_per_task * kOptionBytes);
    t.args.push_back(b.take(AccessMode::In, *w.region));
    b.add_range(*w.region, results, i * options_per_task * kResultBytes,
                options_per_task * kResultBytes);
    t.args.push_back(b.take(AccessMode::Out, *w.region));
    w.tasks.push_back(std::move(t));
  }
  finalize(w);
  return w;
}

Workload gen_matmul(std::uint64_t n, std::uint64_t tile, AllocMode mode, const Calibration& cal) {
  if (tile == 0 || n % tile != 0) throw ConfigError("tile must divide n");
  constexpr std::uint64_t kElem = 4;  // float
  std::uint64_t grid = n / tile;

  Workload w;
  w.name = "matmul";
  w.region = std::make_shared<SharedRegion>();
  // A and B are row-major matrices; C is allocated per tile so that the
  // write footprints of distinct tiles never share a block.
  Allocation a_mat = w.region->alloc(n * n * kElem, mode);
  Allocation b_mat = w.region->alloc(n * n * kElem, mode);
  note_blocks(w, a_mat);
  note_blocks(w, b_mat);
  std::vector<Allocation> c_tiles;
  for (std::uint64_t i = 0; i < grid * grid; ++i) {
    c_tiles.push_back(w.region->alloc(tile * tile * kElem, mode));
    note_blocks(w, c_tiles.back());
  }

  double tile_d = static_cast<double>(tile);
  std::int64_t cycles = cal.flops_to_cycles(w.name, 2.0 * tile_d * tile_d * tile_d);

  auto matrix_tile = [&](ArgBuilder& b, const Allocation& m, std::uint64_t ti, std::uint64_t tj) {
    for (std::uint64_t r = 0; r < tile; ++r) {
      std::uint64_t row = ti * tile + r;
      b.add_range(*w.region, m, (row * n + tj * tile) * kElem, tile * kElem);
    }
  };

  ArgBuilder b;
  for (std::uint64_t i = 0; i < grid; ++i) {
    for (std::uint64_t j = 0; j < grid; ++j) {
      for (std::uint64_t k = 0; k < grid; ++k) {
        TaskDescriptor t;
        t.fn_tag = kFnGemm;
        t.compute_cycles = cycles;
        matrix_tile(b, a_mat, i, k);
        t.args.push_back(b.take(AccessMode::In, *w.region));
        matrix_tile(b, b_mat, k, j);
        t.args.push_back(b.take(AccessMode::In, *w.region));
        b.add_alloc(*w.region, c_tiles[static_cast<std::size_t>(i * grid + j)]);
        t.args.push_back(b.take(AccessMode::InOut, *w.region));
        w.tasks.push_back(std::move(t));
      }
    }
  }
  finalize(w);
  return w;
}

Workload gen_fft(std::uint64_t n, std::uint64_t rows_per_task, std::uint64_t tile,
                 AllocMode mode, const Calibration& cal) {
  if (rows_per_task == 0 || n % rows_per_task != 0) throw ConfigError("rows must divide n");
  if (tile == 0 || n % tile != 0) throw ConfigError("tile must divide n");
  constexpr std::uint64_t kElem = 16;  // complex double
  std::uint64_t bands = n / rows_per_task;
  std::uint64_t grid = n / tile;

  Workload w;
  w.name = "fft";
  w.region = std::make_shared<SharedRegion>();
  Allocation m1 = w.region->alloc(n * n * kElem, mode);
  note_blocks(w, m1);
  std::vector<Allocation> m2_tiles;  // transposed matrix, tile-major
  for (std::uint64_t i = 0; i < grid * grid; ++i) {
    m2_tiles.push_back(w.region->alloc(tile * tile * kElem, mode));
    note_blocks(w, m2_tiles.back());
  }

  double nd = static_cast<double>(n);
  std::int64_t transform_cycles = cal.flops_to_cycles(
      w.name, static_cast<double>(rows_per_task) * 5.0 * nd * std::max(1.0, std::log2(nd)));
  std::int64_t transpose_cycles =
      cal.flops_to_cycles(w.name, 2.0 * static_cast<double>(tile * tile));

  ArgBuilder b;
  // Phase 1: transform row bands of M1 in place.
  for (std::uint64_t band = 0; band < bands; ++band) {
    TaskDescriptor t;
    t.fn_tag = kFnFftTransform;
    t.compute_cycles = transform_cycles;
    b.add_range(*w.region, m1, band * rows_per_task * n * kElem, rows_per_task * n * kElem);
    t.args.push_back(b.take(AccessMode::InOut, *w.region));
    w.tasks.push_back(std::move(t));
  }
  // Phase 2: transpose M1 tiles out of place into M2.
  for (std::uint64_t i = 0; i < grid; ++i) {
    for (std::uint64_t j = 0; j < grid; ++j) {
      TaskDescriptor t;
      t.fn_tag = kFnFftTranspose;
      t.compute_cycles = transpose_cycles;
      for (std::uint64_t r = 0; r < tile; ++r) {
        std::uint64_t row = j * tile + r;  // source tile (j, i)
        b.add_range(*w.region, m1, (row * n + i * tile) * kElem, tile * kElem);
      }
      t.args.push_back(b.take(AccessMode::In, *w.region));
      b.add_alloc(*w.region, m2_tiles[static_cast<std::size_t>(i * grid + j)]);
      t.args.push_back(b.take(AccessMode::Out, *w.region));
      w.tasks.push_back(std::move(t));
    }
  }
  // Phase 3: transform row bands of the transposed matrix.
  for (std::uint64_t band = 0; band < bands; ++band) {
    TaskDescriptor t;
    t.fn_tag = kFnFftTransform;
    t.compute_cycles = transform_cycles;
    for (std::uint64_t r = 0; r < rows_per_task; ++r) {
      std::uint64_t row = band * rows_per_task + r;
      std::uint64_t ti = row / tile;
      for (std::uint64_t tj = 0; tj < grid; ++tj) {
        b.add_range(*w.region, m2_tiles[static_cast<std::size_t>(ti * grid + tj)],
                    (row % tile) * tile * kElem, tile * kElem);
      }
    }
    t.args.push_back(b.take(AccessMode::InOut, *w.region));
    w.tasks.push_back(std::move(t));
  }
  finalize(w);
  return w;
}

Workload gen_jacobi(std::uint64_t n, std::uint64_t tile, int iters, AllocMode mode,
                    const Calibration& cal) {
  if (tile == 0 || n % tile != 0) throw ConfigError("tile must divide n");
  if (iters < 1) throw ConfigError("iters must be >= 1");
  constexpr std::uint64_t kElem = 4;  // float
  std::uint64_t grid = n / tile;

  Workload w;
  w.name = "jacobi";
  w.region = std::make_shared<SharedRegion>();
  std::array<std::vector<Allocation>, 2> gen;
  for (int g = 0; g < 2; ++g) {
    for (std::uint64_t i = 0; i < grid * grid; ++i) {
      gen[static_cast<std::size_t>(g)].push_back(w.region->alloc(tile * tile * kElem, mode));
      note_blocks(w, gen[static_cast<std::size_t>(g)].back());
    }
  }

  std::int64_t cycles = cal.flops_to_cycles(w.name, 5.0 * static_cast<double>(tile * tile));

  ArgBuilder b;
  for (int it = 0; it < iters; ++it) {
    auto& src = gen[static_cast<std::size_t>(it % 2)];
    auto& dst = gen[static_cast<std::size_t>((it + 1) % 2)];
    for (std::uint64_t i = 0; i < grid; ++i) {
      for (std::uint64_t j = 0; j < grid; ++j) {
        TaskDescriptor t;
        t.fn_tag = kFnJacobi;
        t.compute_cycles = cycles;
        // 5-point stencil, clamped at the boundary.
        std::set<std::uint64_t> neigh;
        neigh.insert(i * grid + j);
        if (i > 0) neigh.insert((i - 1) * grid + j);
        if (i + 1 < grid) neigh.insert((i + 1) * grid + j);
        if (j > 0) neigh.insert(i * grid + j - 1);
        if (j + 1 < grid) neigh.insert(i * grid + j + 1);
        for (std::uint64_t idx : neigh) b.add_alloc(*w.region, src[static_cast<std::size_t>(idx)]);
        t.args.push_back(b.take(AccessMode::In, *w.region));
        b.add_alloc(*w.region, dst[static_cast<std::size_t>(i * grid + j)]);
        t.args.push_back(b.take(AccessMode::Out, *w.region));
        w.tasks.push_back(std::move(t));
      }
    }
  }
  finalize(w);
  return w;
}

Workload gen_cholesky(std::uint64_t n, std::uint64_t tile, AllocMode mode,
                      const Calibration& cal) {
  if (tile == 0 || n % tile != 0) throw ConfigError("tile must divide n");
  constexpr std::uint64_t kElem = 8;  // double
  std::uint64_t grid = n / tile;

  Workload w;
  w.name = "cholesky";
  w.region = std::make_shared<SharedRegion>();
  // Lower triangle, tile-major.
  std::map<std::pair<std::uint64_t, std::uint64_t>, Allocation> tiles;
  for (std::uint64_t i = 0; i < grid; ++i) {
    for (std::uint64_t j = 0; j <= i; ++j) {
      tiles[{i, j}] = w.region->alloc(tile * tile * kElem, mode);
      note_blocks(w, tiles[{i, j}]);
    }
  }

  double t3 = static_cast<double>(tile) * static_cast<double>(tile) * static_cast<double>(tile);
  std::int64_t potrf_cycles = cal.flops_to_cycles(w.name, t3 / 3.0);
  std::int64_t trsm_cycles = cal.flops_to_cycles(w.name, t3);
  std::int64_t gemm_cycles = cal.flops_to_cycles(w.name, 2.0 * t3);

  ArgBuilder b;
  auto push = [&](std::uint32_t tag, std::int64_t cycles, std::vector<std::pair<std::pair<std::uint64_t, std::uint64_t>, AccessMode>> args) {
    TaskDescriptor t;
    t.fn_tag = tag;
    t.compute_cycles = cycles;
    for (auto& [coord, m] : args) {
      b.add_alloc(*w.region, tiles.at(coord));
      t.args.push_back(b.take(m, *w.region));
    }
    w.tasks.push_back(std::move(t));
  };

  for (std::uint64_t k = 0; k < grid; ++k) {
    push(kFnPotrf, potrf_cycles, {{{k, k}, AccessMode::InOut}});
    for (std::uint64_t i = k + 1; i < grid; ++i) {
      push(kFnTrsm, trsm_cycles, {{{k, k}, AccessMode::In}, {{i, k}, AccessMode::InOut}});
    }
    for (std::uint64_t i = k + 1; i < grid; ++i) {
      for (std::uint64_t j = k + 1; j <= i; ++j) {
        push(kFnCholGemm, gemm_cycles,
             {{{i, k}, AccessMode::In}, {{j, k}, AccessMode::In}, {{i, j}, AccessMode::InOut}});
      }
    }
  }
  finalize(w);
  return w;
}

Workload gen_random_graph(std::uint64_t seed, std::size_t n_tasks, std::size_t n_blocks,
                          const Calibration& cal) {
  (void)cal;
  Workload w;
  w.name = "random";
  w.region = std::make_shared<SharedRegion>();
  Allocation data = w.region->alloc(static_cast<std::uint64_t>(n_blocks) *
                                        w.region->block_bytes(),
                                    AllocMode::Strided);
  note_blocks(w, data);

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n_tasks; ++i) {
    TaskDescriptor t;
    t.fn_tag = kFnRandom;
    t.compute_cycles = 1000 + static_cast<std::int64_t>(rng() % 20000);
    std::size_t n_args = 1 + rng() % 3;
    std::set<std::uint32_t> used;
    for (std::size_t a = 0; a < n_args; ++a) {
      TaskArg arg;
      arg.mode = static_cast<AccessMode>(rng() % 3);
      std::size_t n_b = 1 + rng() % 4;
      for (std::size_t k = 0; k < n_b; ++k) {
        std::uint32_t b = data.block_ids[rng() % n_blocks];
        if (used.insert(b).second) arg.blocks.push_back(b);
      }
      if (!arg.blocks.empty()) t.args.push_back(std::move(arg));
    }
    w.tasks.push_back(std::move(t));
  }
  finalize(w);
  return w;
}

namespace {

Workload make_stream_bench(const Topology& topo, const std::vector<int>& cores) {
  Workload w;
  w.name = "stream";
  w.region = std::make_shared<SharedRegion>();
  // One 16MB array: exactly the first shared page, owned by controller 0.
  Allocation arr = w.region->alloc(16ull << 20, AllocMode::Contiguous);
  note_blocks(w, arr);
  ArgBuilder b;
  for (int core : cores) {
    (void)topo;
    TaskDescriptor t;
    t.fn_tag = kFnStream;
    t.compute_cycles = 0;
    t.pinned_core = core;
    b.add_alloc(*w.region, arr);
    t.args.push_back(b.take(AccessMode::In, *w.region));
    w.tasks.push_back(std::move(t));
  }
  finalize(w);
  return w;
}

}  // namespace

Workload gen_latency_microbench(int hops, const Topology& topo) {
  for (int c = 0; c < Topology::kCores; ++c) {
    if (topo.mc_distance(CoreId{c}, McId{0}) == hops)
      return make_stream_bench(topo, {c});
  }
  throw ConfigError("no core at requested controller distance");
}

Workload gen_contention_microbench(int num_competitors, const Topology& topo) {
  int reference = -1;
  for (int c = 0; c < Topology::kCores && reference < 0; ++c) {
    if (topo.mc_distance(CoreId{c}, McId{0}) == 9) reference = c;
  }
  std::vector<int> cores{reference};
  for (int c = 0; c < Topology::kCores && static_cast<int>(cores.size()) < num_competitors + 1;
       ++c) {
    if (c != reference) cores.push_back(c);
  }
  return make_stream_bench(topo, cores);
}

Workload make_workload(const std::string& name, bool full_scale, AllocMode mode,
                       const Calibration& cal) {
  if (name == "blackscholes")
    return full_scale ? gen_blackscholes(2097152, 512, mode, cal)
                       : gen_blackscholes(65536, 512, mode, cal);
  if (name == "matmul")
    return full_scale ? gen_matmul(1024, 64, mode, cal) : gen_matmul(256, 32, mode, cal);
  if (name == "fft")
    return full_scale ? gen_fft(1024, 32, 32, mode, cal) : gen_fft(64, 32, 32, mode, cal);
  if (name == "jacobi")
    return full_scale ? gen_jacobi(4096, 512, 16, mode, cal)
                       : gen_jacobi(512, 128, 4, mode, cal);
  if (name == "cholesky")
    return full_scale ? gen_cholesky(2048, 128, mode, cal) : gen_cholesky(512, 64, mode, cal);
  throw ConfigError("unknown workload: " + name);
}

}  // namespace sccsim
