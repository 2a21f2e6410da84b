#include "sparsify/graphs.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace sparsify {

void SparsityPattern::add(int i, int j) {
  if (i < 0 || j < 0 || i >= d || j >= d) throw InvalidInput("pattern: index out of range");
  if (i == j) {
    diag.insert(i);
  } else {
    off_diag.emplace(std::min(i, j), std::max(i, j));
  }
}

bool SparsityPattern::has_edge(int i, int j) const {
  return off_diag.count({std::min(i, j), std::max(i, j)}) > 0;
}

std::vector<int> BlockStructure::permutation() const {
  std::vector<int> perm;
  perm.reserve(d);
  for (const auto& g : groups) perm.insert(perm.end(), g.begin(), g.end());
  return perm;
}

Matrix BlockStructure::permutation_matrix() const {
  const auto perm = permutation();
  Matrix P = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) P(perm[k], k) = 1.0;
  return P;
}

Matrix mean_abs_matrix(const SymmetricMatrixSet& mats) {
  if (mats.empty()) throw InvalidInput("no matrices");
  Matrix acc = Matrix::Zero(mats.dim(), mats.dim());
  for (const auto& h : mats) acc += h.cwiseAbs();
  return acc / static_cast<double>(mats.size());
}

SparsityPattern pattern_from_matrix_set(const SymmetricMatrixSet& mats, double eta) {
  if (eta < 0) throw InvalidInput("pattern: eta must be nonnegative");
  const Matrix bar = mean_abs_matrix(mats);
  SparsityPattern p(mats.dim());
  for (int i = 0; i < p.d; ++i) {
    if (bar(i, i) > eta) p.diag.insert(i);
    for (int j = i + 1; j < p.d; ++j) {
      // H_bar is symmetric up to rounding; either triangle above eta counts.
      if (std::max(bar(i, j), bar(j, i)) > eta) p.off_diag.emplace(i, j);
    }
  }
  return p;
}

BlockStructure make_block_structure(int d, std::vector<std::vector<int>> groups) {
  std::vector<char> seen(d, 0);
  for (auto& g : groups) {
    if (g.empty()) throw InvalidInput("block structure: empty group");
    std::sort(g.begin(), g.end());
    for (int i : g) {
      if (i < 0 || i >= d || seen[i]) throw InvalidInput("block structure: groups must partition [d]");
      seen[i] = 1;
    }
  }
  if (std::count(seen.begin(), seen.end(), 0) != 0) throw InvalidInput("block structure: groups must cover [d]");
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  BlockStructure bs;
  bs.d = d;
  bs.groups = std::move(groups);
  for (const auto& g : bs.groups) bs.profile.push_back(static_cast<int>(g.size()));
  return bs;
}

BlockStructure connected_components(const SparsityPattern& p) {
  std::vector<std::vector<int>> adj(p.d);
  for (const auto& [i, j] : p.off_diag) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<int> comp(p.d, -1);
  std::vector<std::vector<int>> groups;
  for (int s = 0; s < p.d; ++s) {
    if (comp[s] >= 0) continue;
    const int id = static_cast<int>(groups.size());
    groups.emplace_back();
    std::queue<int> q;
    q.push(s);
    comp[s] = id;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      groups[id].push_back(v);
      for (int w : adj[v]) {
        if (comp[w] < 0) {
          comp[w] = id;
          q.push(w);
        }
      }
    }
  }
  return make_block_structure(p.d, std::move(groups));
}

const char* to_string(ProfileOrder o) {
  switch (o) {
    case ProfileOrder::finer: return "finer";
    case ProfileOrder::coarser: return "coarser";
    case ProfileOrder::equal: return "equal";
    case ProfileOrder::incomparable: return "incomparable";
  }
  return "?";
}

namespace {

// Places items[k..] into bins with the given remaining capacities.
bool pack(const std::vector<int>& items, std::size_t k, std::vector<int>& remaining) {
  if (k == items.size()) {
    return std::all_of(remaining.begin(), remaining.end(), [](int r) { return r == 0; });
  }
  for (std::size_t b = 0; b < remaining.size(); ++b) {
    if (remaining[b] < items[k]) continue;
    // bins with equal remaining capacity are interchangeable
    bool dup = false;
    for (std::size_t c = 0; c < b; ++c) dup = dup || remaining[c] == remaining[b];
    if (dup) continue;
    remaining[b] -= items[k];
    if (pack(items, k + 1, remaining)) return true;
    remaining[b] += items[k];
  }
  return false;
}

}  // namespace

bool profile_refines(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> items = a;
  std::sort(items.begin(), items.end(), std::greater<>());
  std::vector<int> bins = b;
  std::sort(bins.begin(), bins.end(), std::greater<>());
  if (items.size() < bins.size()) return false;
  return pack(items, 0, bins);
}

ProfileOrder profile_preceq(std::vector<int> a, std::vector<int> b) {
  for (int x : a) if (x <= 0) throw InvalidInput("profile entries must be positive");
  for (int x : b) if (x <= 0) throw InvalidInput("profile entries must be positive");
  if (std::accumulate(a.begin(), a.end(), 0) != std::accumulate(b.begin(), b.end(), 0)) {
    throw InvalidInput("profiles must sum to the same dimension");
  }
  const bool ab = profile_refines(a, b);
  const bool ba = profile_refines(b, a);
  if (ab && ba) return ProfileOrder::equal;
  if (ab) return ProfileOrder::finer;
  if (ba) return ProfileOrder::coarser;
  return ProfileOrder::incomparable;
}

namespace {

using Bits = std::uint32_t;

void bron_kerbosch(Bits r, Bits p, Bits x, const std::vector<Bits>& adj,
                   std::vector<Bits>& out) {
  if (p == 0 && x == 0) {
    out.push_back(r);
    return;
  }
  // pivot: vertex of P u X with most neighbours in P
  int pivot = -1;
  int best = -1;
  for (Bits px = p | x; px != 0; px &= px - 1) {
    const int u = __builtin_ctz(px);
    const int c = __builtin_popcount(p & adj[u]);
    if (c > best) {
      best = c;
      pivot = u;
    }
  }
  for (Bits cand = p & ~adj[pivot]; cand != 0; cand &= cand - 1) {
    const int v = __builtin_ctz(cand);
    const Bits bit = Bits{1} << v;
    bron_kerbosch(r | bit, p & adj[v], x & adj[v], adj, out);
    p &= ~bit;
    x |= bit;
  }
}

}  // namespace

std::vector<std::vector<int>> maximal_cliques(const SparsityPattern& p) {
  if (p.d > 25) throw InvalidInput("maximal_cliques: d > 25 not supported");
  std::vector<Bits> adj(p.d, 0);
  Bits vertices = 0;
  for (int i : p.diag) vertices |= Bits{1} << i;
  for (const auto& [i, j] : p.off_diag) {
    adj[i] |= Bits{1} << j;
    adj[j] |= Bits{1} << i;
    vertices |= (Bits{1} << i) | (Bits{1} << j);
  }
  std::vector<Bits> found;
  if (vertices != 0) bron_kerbosch(0, vertices, 0, adj, found);
  std::vector<std::vector<int>> cliques;
  for (Bits c : found) {
    std::vector<int> members;
    for (Bits b = c; b != 0; b &= b - 1) members.push_back(__builtin_ctz(b));
    cliques.push_back(std::move(members));
  }
  std::sort(cliques.begin(), cliques.end());
  return cliques;
}

}  // namespace sparsify
