#include "bottleneck/detail/lifted_hull.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>

namespace bottleneck::detail {

namespace {

constexpr std::size_t kMaxDim = 4;

struct Facet
{
  std::array<std::uint32_t, kMaxDim> verts{};
  std::array<int, kMaxDim> nb{};
  std::array<Int128, kMaxDim> normal{};
  Int128 offset = 0;
  std::vector<std::uint32_t> outside;
  bool alive = true;
  std::size_t stamp = 0;
};

class Quickhull
{
public:
  Quickhull(std::span<const std::int64_t> coords, std::size_t dim)
      : coords_(coords), dim_(dim), count_(coords.size() / dim)
  {
  }

  LiftedHull run(std::span<const std::uint32_t> base_simplex);

private:
  Int128 coord(std::uint32_t p, std::size_t j) const
  {
    return static_cast<Int128>(coords_[static_cast<std::size_t>(p) * dim_ + j]);
  }

  Int128 distance(const Facet& f, std::uint32_t p) const
  {
    Int128 s = -f.offset;
    for (std::size_t j = 0; j < dim_; ++j)
      s += f.normal[j] * coord(p, j);
    return s;
  }

  void set_plane(Facet& f) const;
  void orient(Facet& f) const;
  void assign(std::vector<std::uint32_t>& points, std::span<const int> candidates);

  std::span<const std::int64_t> coords_;
  std::size_t dim_;
  std::size_t count_;
  std::vector<Facet> facets_;
  std::array<Int128, kMaxDim> interior_{};
  Int128 interior_scale_ = 0;
};

void Quickhull::set_plane(Facet& f) const
{
  // Generalized cross product of the edge vectors v_i - v_0.
  const std::size_t rows = dim_ - 1;
  std::array<Int128, kMaxDim * kMaxDim> edges{};
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < dim_; ++j)
      edges[i * dim_ + j] = coord(f.verts[i + 1], j) - coord(f.verts[0], j);

  std::array<Int128, kMaxDim * kMaxDim> minor{};
  for (std::size_t col = 0; col < dim_; ++col) {
    for (std::size_t i = 0; i < rows; ++i) {
      std::size_t c = 0;
      for (std::size_t j = 0; j < dim_; ++j)
        if (j != col)
          minor[i * rows + c++] = edges[i * dim_ + j];
    }
    const Int128 d = determinant({minor.data(), rows * rows}, rows);
    f.normal[col] = (col % 2 == 0) ? d : -d;
  }
  f.offset = 0;
  for (std::size_t j = 0; j < dim_; ++j)
    f.offset += f.normal[j] * coord(f.verts[0], j);
}

void Quickhull::orient(Facet& f) const
{
  set_plane(f);
  Int128 side = -f.offset * interior_scale_;
  for (std::size_t j = 0; j < dim_; ++j)
    side += f.normal[j] * interior_[j];
  if (side == 0)
    throw std::logic_error("lower_hull: facet through the interior reference point");
  if (side > 0) {
    for (std::size_t j = 0; j < dim_; ++j)
      f.normal[j] = -f.normal[j];
    f.offset = -f.offset;
  }
}

void Quickhull::assign(std::vector<std::uint32_t>& points, std::span<const int> candidates)
{
  for (std::uint32_t p : points)
    for (int id : candidates)
      if (distance(facets_[id], p) > 0) {
        facets_[id].outside.push_back(p);
        break;
      }
}

LiftedHull Quickhull::run(std::span<const std::uint32_t> base_simplex)
{
  LiftedHull out;
  if (base_simplex.size() != dim_)
    throw std::invalid_argument("lower_hull: base simplex must name dim points");

  // Apex: the point furthest from the hyperplane through the base simplex.
  Facet probe;
  std::copy(base_simplex.begin(), base_simplex.end(), probe.verts.begin());
  set_plane(probe);
  std::uint32_t apex = 0;
  Int128 best = 0;
  for (std::uint32_t p = 0; p < count_; ++p) {
    Int128 d = distance(probe, p);
    if (d < 0)
      d = -d;
    if (d > best) {
      best = d;
      apex = p;
    }
  }
  if (best == 0) {
    out.degenerate = true;
    return out;
  }

  std::array<std::uint32_t, kMaxDim + 1> simplex{};
  std::copy(base_simplex.begin(), base_simplex.end(), simplex.begin());
  simplex[dim_] = apex;
  interior_scale_ = static_cast<Int128>(dim_ + 1);
  for (std::size_t i = 0; i <= dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j)
      interior_[j] += coord(simplex[i], j);

  // Facet i omits simplex vertex i; its neighbour across vertex k is facet k.
  for (std::size_t i = 0; i <= dim_; ++i) {
    Facet f;
    std::size_t c = 0;
    std::array<std::size_t, kMaxDim> owner{};
    for (std::size_t k = 0; k <= dim_; ++k)
      if (k != i) {
        owner[c] = k;
        f.verts[c++] = simplex[k];
      }
    for (std::size_t c2 = 0; c2 < dim_; ++c2)
      f.nb[c2] = static_cast<int>(owner[c2]);
    orient(f);
    facets_.push_back(std::move(f));
  }

  {
    std::vector<char> in_simplex(count_, 0);
    for (std::size_t i = 0; i <= dim_; ++i)
      in_simplex[simplex[i]] = 1;
    std::vector<std::uint32_t> rest;
    rest.reserve(count_);
    for (std::uint32_t p = 0; p < count_; ++p)
      if (!in_simplex[p])
        rest.push_back(p);
    std::vector<int> all(dim_ + 1);
    for (std::size_t i = 0; i <= dim_; ++i)
      all[i] = static_cast<int>(i);
    assign(rest, all);
  }

  std::vector<int> pending;
  for (std::size_t i = 0; i <= dim_; ++i)
    if (!facets_[i].outside.empty())
      pending.push_back(static_cast<int>(i));

  std::size_t stamp = 0;
  std::vector<int> visible;
  std::vector<int> created;
  std::vector<std::uint32_t> orphans;
  std::map<std::array<std::uint32_t, kMaxDim>, std::pair<int, std::size_t>> ridges;

  while (!pending.empty()) {
    const int fid = pending.back();
    pending.pop_back();
    if (!facets_[fid].alive || facets_[fid].outside.empty())
      continue;

    std::uint32_t eye = facets_[fid].outside.front();
    {
      Int128 far = distance(facets_[fid], eye);
      for (std::uint32_t p : facets_[fid].outside) {
        const Int128 d = distance(facets_[fid], p);
        if (d > far) {
          far = d;
          eye = p;
        }
      }
    }

    // Visible region by flood fill from fid.
    ++stamp;
    visible.clear();
    visible.push_back(fid);
    facets_[fid].stamp = stamp;
    for (std::size_t k = 0; k < visible.size(); ++k) {
      const Facet& v = facets_[visible[k]];
      for (std::size_t i = 0; i < dim_; ++i) {
        const int nid = v.nb[i];
        if (facets_[nid].stamp == stamp)
          continue;
        if (distance(facets_[nid], eye) > 0) {
          facets_[nid].stamp = stamp;
          visible.push_back(nid);
        }
      }
    }

    // One new facet per horizon ridge.
    created.clear();
    ridges.clear();
    for (int vid : visible) {
      for (std::size_t i = 0; i < dim_; ++i) {
        const int nid = facets_[vid].nb[i];
        if (facets_[nid].stamp == stamp)
          continue;
        Facet nf;
        nf.verts = facets_[vid].verts;
        nf.verts[i] = eye;
        nf.nb.fill(-1);
        nf.nb[i] = nid;
        orient(nf);
        const int new_id = static_cast<int>(facets_.size());
        for (std::size_t k = 0; k < dim_; ++k)
          if (facets_[nid].nb[k] == vid)
            facets_[nid].nb[k] = new_id;
        facets_.push_back(std::move(nf));
        created.push_back(new_id);

        Facet& ref = facets_[new_id];
        for (std::size_t j = 0; j < dim_; ++j) {
          if (j == i)
            continue;
          std::array<std::uint32_t, kMaxDim> key{};
          std::size_t c = 0;
          for (std::size_t k = 0; k < dim_; ++k)
            if (k != j)
              key[c++] = ref.verts[k];
          std::sort(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(c));
          auto [it, inserted] = ridges.try_emplace(key, new_id, j);
          if (!inserted) {
            ref.nb[j] = it->second.first;
            facets_[it->second.first].nb[it->second.second] = new_id;
            ridges.erase(it);
          }
        }
      }
    }
    if (!ridges.empty())
      throw std::logic_error("lower_hull: unmatched horizon ridge");

    orphans.clear();
    for (int vid : visible) {
      Facet& v = facets_[vid];
      v.alive = false;
      for (std::uint32_t p : v.outside)
        if (p != eye)
          orphans.push_back(p);
      v.outside.clear();
      v.outside.shrink_to_fit();
    }
    assign(orphans, created);
    for (int id : created)
      if (!facets_[id].outside.empty())
        pending.push_back(id);
  }

  for (const Facet& f : facets_) {
    if (!f.alive)
      continue;
    ++out.facet_count;
    if (f.normal[dim_ - 1] < 0)
      out.lower_facets.emplace_back(f.verts.begin(),
                                    f.verts.begin() + static_cast<std::ptrdiff_t>(dim_));
  }
  return out;
}

}  // namespace

Int128 determinant(std::span<const Int128> a, std::size_t k)
{
  switch (k) {
  case 0:
    return 1;
  case 1:
    return a[0];
  case 2:
    return a[0] * a[3] - a[1] * a[2];
  case 3:
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
           + a[2] * (a[3] * a[7] - a[4] * a[6]);
  case 4: {
    Int128 total = 0;
    std::array<Int128, 9> sub{};
    for (std::size_t col = 0; col < 4; ++col) {
      std::size_t c = 0;
      for (std::size_t i = 1; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
          if (j != col)
            sub[c++] = a[i * 4 + j];
      const Int128 term = a[col] * determinant(sub, 3);
      total += (col % 2 == 0) ? term : -term;
    }
    return total;
  }
  default:
    throw std::invalid_argument("determinant: matrices larger than 4 x 4 are not supported");
  }
}

LiftedHull lower_hull(std::span<const std::int64_t> coords, std::size_t dim,
                      std::span<const std::uint32_t> base_simplex)
{
  if (dim < 2 || dim > kMaxDim)
    throw std::invalid_argument("lower_hull: dimension must be in [2, 4]");
  if (coords.size() % dim != 0)
    throw std::invalid_argument("lower_hull: coordinate array is not a multiple of dim");
  return Quickhull(coords, dim).run(base_simplex);
}

}  // namespace bottleneck::detail
