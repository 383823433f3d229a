// Copyright 2026 The permglm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "permglm/streaming.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <thread>

#include "permglm/error.hpp"

namespace permglm {
namespace {

constexpr int kFractionBits = 60;

unsigned __int128 to_fixed(double fraction) {
  return static_cast<std::uint64_t>(std::ldexp(fraction, kFractionBits));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ParseError("truncated state stream");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_doubles(std::ostream& out, const std::vector<double>& v) {
  put_u64(out, v.size());
  for (double d : v) put_u64(out, std::bit_cast<std::uint64_t>(d));
}

std::vector<double> get_doubles(std::istream& in, std::size_t expected) {
  const auto size = get_u64(in);
  if (size != expected) throw ParseError("state array has unexpected length");
  std::vector<double> v(size);
  for (auto& d : v) d = std::bit_cast<double>(get_u64(in));
  return v;
}

void put_u32s(std::ostream& out, const std::vector<std::uint32_t>& v) {
  put_u64(out, v.size());
  for (auto x : v) put_u64(out, x);
}

std::vector<std::uint32_t> get_u32s(std::istream& in, std::size_t expected) {
  const auto size = get_u64(in);
  if (size != expected) throw ParseError("state array has unexpected length");
  std::vector<std::uint32_t> v(size);
  for (auto& x : v) x = static_cast<std::uint32_t>(get_u64(in));
  return v;
}

unsigned kind_bits(MeasureSet kinds) {
  unsigned bits = 0;
  for (auto k : kinds.kinds()) bits |= 1u << static_cast<unsigned>(k);
  return bits;
}

MeasureSet kinds_from_bits(unsigned bits) {
  MeasureSet s;
  for (auto k : kAllMeasures)
    if (bits & (1u << static_cast<unsigned>(k))) s.insert(k);
  return s;
}

constexpr char kStateMagic[8] = {'P', 'G', 'L', 'M', 'A', 'U', 'G', '1'};
constexpr char kCheckpointMagic[8] = {'P', 'G', 'L', 'M', 'C', 'K', 'P', '1'};

}  // namespace

void AreaState::update(double m) {
  const double top = std::ceil(m);
  const auto rank = static_cast<std::uint32_t>(top);
  if (rank > extreme) return;
  const auto fraction = to_fixed(top - m);
  if (rank == extreme) {
    excess += fraction;
  } else {
    extreme = rank;
    excess = fraction;
  }
}

void AreaState::merge(const AreaState& other) {
  if (other.extreme < extreme) {
    *this = other;
  } else if (other.extreme == extreme) {
    excess += other.excess;
  }
}

double AreaState::excess_sum() const {
  return std::ldexp(static_cast<double>(excess), -kFractionBits);
}

void erl_update(std::span<std::uint32_t> ranks, std::span<std::uint32_t> counts,
                std::uint32_t rank) {
  const auto it = std::lower_bound(ranks.begin(), ranks.end(), rank);
  if (it == ranks.end()) return;
  const auto p = static_cast<std::size_t>(it - ranks.begin());
  if (*it == rank) {
    ++counts[p];
    return;
  }
  for (std::size_t q = ranks.size() - 1; q > p; --q) {
    ranks[q] = ranks[q - 1];
    counts[q] = counts[q - 1];
  }
  ranks[p] = rank;
  counts[p] = 1;
}

void erl_merge(std::span<std::uint32_t> ranks, std::span<std::uint32_t> counts, ErlView other) {
  const std::size_t slots = ranks.size();
  std::uint32_t merged_r[64], merged_c[64];
  std::vector<std::uint32_t> heap_r, heap_c;
  std::uint32_t* mr = merged_r;
  std::uint32_t* mc = merged_c;
  if (slots > 64) {
    heap_r.resize(slots);
    heap_c.resize(slots);
    mr = heap_r.data();
    mc = heap_c.data();
  }
  std::size_t a = 0, b = 0;
  for (std::size_t out = 0; out < slots; ++out) {
    const std::uint32_t ra = a < slots ? ranks[a] : kInfiniteRank;
    const std::uint32_t rb = b < other.ranks.size() ? other.ranks[b] : kInfiniteRank;
    if (ra == rb) {
      mr[out] = ra;
      mc[out] = (a < slots ? counts[a] : 0) + (b < other.counts.size() ? other.counts[b] : 0);
      ++a;
      ++b;
    } else if (ra < rb) {
      mr[out] = ra;
      mc[out] = counts[a];
      ++a;
    } else {
      mr[out] = rb;
      mc[out] = other.counts[b];
      ++b;
    }
  }
  std::copy(mr, mr + slots, ranks.begin());
  std::copy(mc, mc + slots, counts.begin());
}

Extremeness erl_compare(ErlView a, ErlView b) {
  const std::size_t slots = std::min(a.ranks.size(), b.ranks.size());
  for (std::size_t p = 0; p < slots; ++p) {
    if (a.ranks[p] != b.ranks[p]) return a.ranks[p] < b.ranks[p] ? Extremeness::first
                                                                  : Extremeness::second;
    if (a.counts[p] != b.counts[p]) return a.counts[p] > b.counts[p] ? Extremeness::first
                                                                      : Extremeness::second;
  }
  return Extremeness::tie;
}

AugmentedMeasures::AugmentedMeasures(std::size_t functions, MeasureSet kinds,
                                     std::size_t erl_slots)
    : functions_(functions), slots_(erl_slots), kinds_(kinds) {
  if (functions < 2) throw ConfigError("augmented measures need at least two functions");
  if (kinds.contains(MeasureKind::erl) && erl_slots < 1)
    throw ConfigError("ERL needs at least one slot");
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (kinds.contains(MeasureKind::pmin)) pmin_.assign(functions, inf);
  if (kinds.contains(MeasureKind::cont)) cont_.assign(functions, inf);
  if (kinds.contains(MeasureKind::fmax)) fmax_.assign(functions, -inf);
  if (kinds.contains(MeasureKind::area)) area_.assign(functions, AreaState{});
  if (kinds.contains(MeasureKind::erl)) {
    erl_ranks_.assign(functions * erl_slots, kInfiniteRank);
    erl_counts_.assign(functions * erl_slots, 0);
  }
}

void AugmentedMeasures::add_location(std::span<const double> statistics,
                                     std::span<const double> ordinary,
                                     std::span<const double> continuous) {
  const double top_ordinary = static_cast<double>(functions_) + 1.0;  // J + 2
  const double top_continuous = static_cast<double>(functions_);      // J + 1
  if (kinds_.needs_ordinary_ranks() && ordinary.size() != functions_)
    throw ConsistencyError("missing ordinary ranks");
  if (kinds_.needs_continuous_ranks() && continuous.size() != functions_)
    throw ConsistencyError("missing continuous ranks");
  if (!fmax_.empty()) {
    if (statistics.size() != functions_) throw ConsistencyError("missing statistics");
    for (std::size_t j = 0; j < functions_; ++j) fmax_[j] = std::max(fmax_[j], statistics[j]);
  }
  if (!pmin_.empty())
    for (std::size_t j = 0; j < functions_; ++j)
      pmin_[j] = update_pmin_cont(pmin_[j], top_ordinary - ordinary[j]);
  if (!erl_ranks_.empty())
    for (std::size_t j = 0; j < functions_; ++j) {
      const auto doubled = static_cast<std::uint32_t>(2.0 * (top_ordinary - ordinary[j]));
      erl_update({erl_ranks_.data() + j * slots_, slots_}, {erl_counts_.data() + j * slots_, slots_},
                 doubled);
    }
  if (!cont_.empty())
    for (std::size_t j = 0; j < functions_; ++j)
      cont_[j] = update_pmin_cont(cont_[j], top_continuous - continuous[j]);
  if (!area_.empty())
    for (std::size_t j = 0; j < functions_; ++j) area_[j].update(top_continuous - continuous[j]);
  ++locations_;
}

void AugmentedMeasures::merge(const AugmentedMeasures& other) {
  if (other.functions_ != functions_ || other.slots_ != slots_ || !(other.kinds_ == kinds_))
    throw ConsistencyError("cannot merge augmented states of different shapes");
  for (std::size_t j = 0; j < pmin_.size(); ++j) pmin_[j] = std::min(pmin_[j], other.pmin_[j]);
  for (std::size_t j = 0; j < cont_.size(); ++j) cont_[j] = std::min(cont_[j], other.cont_[j]);
  for (std::size_t j = 0; j < fmax_.size(); ++j) fmax_[j] = std::max(fmax_[j], other.fmax_[j]);
  for (std::size_t j = 0; j < area_.size(); ++j) area_[j].merge(other.area_[j]);
  if (!erl_ranks_.empty())
    for (std::size_t j = 0; j < functions_; ++j)
      erl_merge({erl_ranks_.data() + j * slots_, slots_}, {erl_counts_.data() + j * slots_, slots_},
                other.erl_state(j));
  locations_ += other.locations_;
}

ErlView AugmentedMeasures::erl_state(std::size_t j) const {
  if (erl_ranks_.empty()) throw ConfigError("ERL was not requested");
  return {{erl_ranks_.data() + j * slots_, slots_}, {erl_counts_.data() + j * slots_, slots_}};
}

std::map<MeasureKind, MeasureVector> AugmentedMeasures::finalize() const {
  const double top = static_cast<double>(functions_);
  std::map<MeasureKind, MeasureVector> out;
  if (!pmin_.empty()) {
    MeasureVector m{MeasureKind::pmin, pmin_};
    for (auto& v : m.values) v /= top;
    out[MeasureKind::pmin] = std::move(m);
  }
  if (!cont_.empty()) {
    MeasureVector m{MeasureKind::cont, cont_};
    for (auto& v : m.values) v /= top;
    out[MeasureKind::cont] = std::move(m);
  }
  if (!area_.empty()) {
    MeasureVector m{MeasureKind::area, std::vector<double>(functions_)};
    const double n = static_cast<double>(locations_);
    for (std::size_t j = 0; j < functions_; ++j)
      m.values[j] = (static_cast<double>(area_[j].extreme) - area_[j].excess_sum() / n) / top;
    out[MeasureKind::area] = std::move(m);
  }
  if (!fmax_.empty()) out[MeasureKind::fmax] = MeasureVector{MeasureKind::fmax, fmax_};
  if (!erl_ranks_.empty()) out[MeasureKind::erl] = erl_from_states(*this);
  return out;
}

namespace {

std::vector<std::size_t> erl_order(const AugmentedMeasures& state) {
  std::vector<std::size_t> order(state.functions());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return erl_compare(state.erl_state(a), state.erl_state(b)) == Extremeness::first;
  });
  return order;
}

}  // namespace

std::size_t AugmentedMeasures::erl_truncated_ties() const {
  if (erl_ranks_.empty()) return 0;
  const auto order = erl_order(*this);
  std::size_t truncated = 0;
  std::size_t start = 0;
  for (std::size_t p = 1; p <= order.size(); ++p) {
    if (p < order.size() &&
        erl_compare(erl_state(order[p - 1]), erl_state(order[p])) == Extremeness::tie)
      continue;
    if (p - start > 1) {
      const auto counts = erl_state(order[start]).counts;
      const auto covered = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
      if (covered < locations_) truncated += p - start;
    }
    start = p;
  }
  return truncated;
}

MeasureVector erl_from_states(const AugmentedMeasures& state) {
  const auto order = erl_order(state);
  const double top = static_cast<double>(state.functions());
  MeasureVector m{MeasureKind::erl, std::vector<double>(state.functions())};
  std::size_t group_start = 0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (p > 0 &&
        erl_compare(state.erl_state(order[p - 1]), state.erl_state(order[p])) != Extremeness::tie)
      group_start = p;
    m.values[order[p]] = static_cast<double>(group_start) / top;
  }
  return m;
}

void AugmentedMeasures::save(std::ostream& out) const {
  out.write(kStateMagic, sizeof(kStateMagic));
  put_u64(out, functions_);
  put_u64(out, slots_);
  put_u64(out, kind_bits(kinds_));
  put_u64(out, locations_);
  put_doubles(out, pmin_);
  put_doubles(out, cont_);
  put_doubles(out, fmax_);
  put_u64(out, area_.size());
  for (const auto& a : area_) {
    put_u64(out, a.extreme);
    put_u64(out, static_cast<std::uint64_t>(a.excess));
    put_u64(out, static_cast<std::uint64_t>(a.excess >> 64));
  }
  put_u32s(out, erl_ranks_);
  put_u32s(out, erl_counts_);
  if (!out) throw IoError("failed writing augmented state");
}

AugmentedMeasures AugmentedMeasures::load(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kStateMagic, 8) != 0)
    throw ParseError("not an augmented-state stream");
  const auto functions = get_u64(in);
  const auto slots = get_u64(in);
  const auto kinds = kinds_from_bits(static_cast<unsigned>(get_u64(in)));
  AugmentedMeasures s(functions, kinds, slots);
  s.locations_ = get_u64(in);
  s.pmin_ = get_doubles(in, s.pmin_.size());
  s.cont_ = get_doubles(in, s.cont_.size());
  s.fmax_ = get_doubles(in, s.fmax_.size());
  if (get_u64(in) != s.area_.size()) throw ParseError("state array has unexpected length");
  for (auto& a : s.area_) {
    a.extreme = static_cast<std::uint32_t>(get_u64(in));
    const auto lo = get_u64(in);
    const auto hi = get_u64(in);
    a.excess = (static_cast<unsigned __int128>(hi) << 64) | lo;
  }
  s.erl_ranks_ = get_u32s(in, s.erl_ranks_.size());
  s.erl_counts_ = get_u32s(in, s.erl_counts_.size());
  return s;
}

void scan_locations(const StatEngine& engine, std::size_t first, std::size_t last,
                    const StreamingOptions& options, AugmentedMeasures& state,
                    std::size_t* degenerate_count) {
  const std::size_t functions = engine.functions();
  if (state.functions() != functions) throw ConsistencyError("state does not match the plan");
  const std::size_t bw = std::max<std::size_t>(1, options.block_width);
  const MeasureSet kinds = state.kinds();
  const bool want_ordinary = kinds.needs_ordinary_ranks();
  const bool want_continuous = kinds.needs_continuous_ranks();
  std::vector<double> block(functions * std::min(bw, std::max<std::size_t>(1, last - first)));
  std::vector<double> column(functions);
  std::vector<double> ordinary(want_ordinary ? functions : 0);
  std::vector<double> continuous(want_continuous ? functions : 0);
  ColumnRanker ranker(options.ties);
  StatEngine::Workspace ws;
  std::size_t degenerate = 0;
  for (std::size_t start = first; start < last; start += bw) {
    const std::size_t width = std::min(bw, last - start);
    engine.compute_block(start, width, block, ws);
    for (std::size_t b = 0; b < width; ++b) {
      for (std::size_t j = 0; j < functions; ++j) {
        column[j] = block[j * width + b];
        if (column[j] == simd::kDegenerateStatistic) ++degenerate;
      }
      if (want_ordinary || want_continuous) ranker.rank(column, ordinary, continuous);
      state.add_location(column, ordinary, continuous);
    }
  }
  if (degenerate_count) *degenerate_count += degenerate;
}

std::size_t resolve_thread_count(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

StreamingResult streaming_run(const FunctionalDataset& dataset, const DesignSpec& design,
                              const PermutationPlan& plan, MeasureSet kinds,
                              const StreamingOptions& options) {
  if (kinds.empty()) throw ConfigError("no measures requested");
  const auto& kernels = options.kernels ? *options.kernels : simd::active_kernels();
  const StatEngine engine(dataset, design, plan, kernels);
  const std::size_t n = engine.locations();
  const std::size_t threads = std::min(resolve_thread_count(options.threads), std::max<std::size_t>(1, n));
  AugmentedMeasures state(engine.functions(), kinds, options.erl_slots);
  std::size_t degenerate = 0;
  if (threads == 1) {
    scan_locations(engine, 0, n, options, state, &degenerate);
  } else {
    // Merges are exact, so the assignment of chunks to workers does not
    // affect the result.
    const std::size_t chunk = std::max<std::size_t>(1, options.chunk_locations);
    std::atomic<std::size_t> next{0};
    std::vector<AugmentedMeasures> partial(threads, AugmentedMeasures(engine.functions(), kinds,
                                                                      options.erl_slots));
    std::vector<std::size_t> partial_degenerate(threads, 0);
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> workers;
      for (std::size_t w = 0; w < threads; ++w)
        workers.emplace_back([&, w] {
          try {
            for (std::size_t first = next.fetch_add(chunk); first < n;
                 first = next.fetch_add(chunk))
              scan_locations(engine, first, std::min(n, first + chunk), options, partial[w],
                             &partial_degenerate[w]);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    for (std::size_t w = 0; w < threads; ++w) {
      state.merge(partial[w]);
      degenerate += partial_degenerate[w];
    }
  }
  auto measures = state.finalize();
  return StreamingResult{std::move(measures), std::move(state), plan.fingerprint(), degenerate};
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_u64(out, checkpoint.plan_fingerprint);
  put_u64(out, checkpoint.next_location);
  checkpoint.state.save(out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw ParseError("'" + path.string() + "' is not a checkpoint file");
  const auto fingerprint = get_u64(in);
  const auto next = get_u64(in);
  return Checkpoint{AugmentedMeasures::load(in), fingerprint, static_cast<std::size_t>(next)};
}

}  // namespace permglm
