#include "robarb/partition.hpp"

namespace robarb {

BoxPartition sample_boxes(Rng& rng, const AssetBounds& bounds, int depth) {
  if (depth < 0 || depth > kMaxPartitionDepth)
    throw InputError("partition depth must be in [0, 63]");
  if (!(bounds.lower.array() < bounds.upper.array()).all())
    throw InputError("bounds require lower < upper for every asset");
  const auto d = bounds.assets();
  BoxPartition p;
  p.bounds = bounds;
  p.lower.resize(depth, d);
  p.upper.resize(depth, d);
  for (int i = 0; i < depth; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      p.lower(i, j) = rng.uniform(bounds.lower[j], bounds.upper[j]);
      p.upper(i, j) = bounds.upper[j];
    }
  }
  return p;
}

std::vector<std::uint64_t> cell_indices(const BoxPartition& partition,
                                        const Eigen::Ref<const Eigen::MatrixXd>& terminals) {
  std::vector<std::uint64_t> out(static_cast<std::size_t>(terminals.cols()));
  for (Eigen::Index l = 0; l < terminals.cols(); ++l)
    out[static_cast<std::size_t>(l)] = cell_index(partition, terminals.col(l));
  return out;
}

bool IntervalBox::empty() const {
  for (const auto& s : sides)
    if (s.empty()) return true;
  return false;
}

bool IntervalBox::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  for (std::size_t j = 0; j < sides.size(); ++j)
    if (!sides[j].contains(x[static_cast<Eigen::Index>(j)])) return false;
  return true;
}

bool CellRegion::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  for (const auto& piece : pieces)
    if (piece.contains(x)) return true;
  return false;
}

namespace {

Interval intersect(const Interval& a, const Interval& b) {
  Interval r;
  if (a.lo > b.lo) {
    r.lo = a.lo;
    r.lo_closed = a.lo_closed;
  } else if (b.lo > a.lo) {
    r.lo = b.lo;
    r.lo_closed = b.lo_closed;
  } else {
    r.lo = a.lo;
    r.lo_closed = a.lo_closed && b.lo_closed;
  }
  if (a.hi < b.hi) {
    r.hi = a.hi;
    r.hi_closed = a.hi_closed;
  } else if (b.hi < a.hi) {
    r.hi = b.hi;
    r.hi_closed = b.hi_closed;
  } else {
    r.hi = a.hi;
    r.hi_closed = a.hi_closed && b.hi_closed;
  }
  return r;
}

IntervalBox intersect(const IntervalBox& a, const IntervalBox& b) {
  IntervalBox r;
  r.sides.reserve(a.sides.size());
  for (std::size_t j = 0; j < a.sides.size(); ++j) r.sides.push_back(intersect(a.sides[j], b.sides[j]));
  return r;
}

IntervalBox omega_box(const AssetBounds& bounds) {
  IntervalBox box;
  for (Eigen::Index j = 0; j < bounds.assets(); ++j)
    box.sides.push_back({bounds.lower[j], bounds.upper[j], true, true});
  return box;
}

// Omega \ A as disjoint slabs: slab j has sides < j inside A, side j outside A.
std::vector<IntervalBox> complement(const IntervalBox& omega, const IntervalBox& a) {
  std::vector<IntervalBox> out;
  const std::size_t d = omega.sides.size();
  for (std::size_t j = 0; j < d; ++j) {
    const Interval& side = a.sides[j];
    const Interval below{omega.sides[j].lo, side.lo, true, !side.lo_closed};
    const Interval above{side.hi, omega.sides[j].hi, !side.hi_closed, true};
    for (const auto& outside : {below, above}) {
      IntervalBox slab = omega;
      for (std::size_t k = 0; k < j; ++k) slab.sides[k] = intersect(omega.sides[k], a.sides[k]);
      slab.sides[j] = intersect(omega.sides[j], outside);
      if (!slab.empty()) out.push_back(std::move(slab));
    }
  }
  return out;
}

}  // namespace

std::vector<CellRegion> brute_force_cells(const BoxPartition& partition) {
  if (partition.assets() > 3 || partition.depth() > 8)
    throw InputError("brute_force_cells is limited to d <= 3 and depth <= 8");

  const IntervalBox omega = omega_box(partition.bounds);
  std::vector<CellRegion> cells{CellRegion{0, {omega}}};
  for (int i = 0; i < partition.depth(); ++i) {
    IntervalBox a;
    for (int j = 0; j < partition.assets(); ++j)
      a.sides.push_back({partition.lower(i, j), partition.upper(i, j), false, true});
    const auto a_complement = complement(omega, a);

    std::vector<CellRegion> next;
    for (const auto& e : cells) {
      CellRegion in{e.index | (std::uint64_t{1} << i), {}};
      CellRegion out{e.index, {}};
      for (const auto& piece : e.pieces) {
        auto inside = intersect(piece, a);
        if (!inside.empty()) in.pieces.push_back(std::move(inside));
        for (const auto& c : a_complement) {
          auto outside = intersect(piece, c);
          if (!outside.empty()) out.pieces.push_back(std::move(outside));
        }
      }
      if (!in.pieces.empty()) next.push_back(std::move(in));
      if (!out.pieces.empty()) next.push_back(std::move(out));
    }
    cells = std::move(next);
  }
  return cells;
}

namespace {

nlohmann::json matrix_rows(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd to_vector(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json to_json(const BoxPartition& partition) {
  nlohmann::json j;
  j["schema"] = "robarb.partition/1";
  j["bounds"] = {{"lower", std::vector<double>(partition.bounds.lower.begin(), partition.bounds.lower.end())},
                 {"upper", std::vector<double>(partition.bounds.upper.begin(), partition.bounds.upper.end())},
                 {"delta", partition.bounds.delta}};
  j["lower_corners"] = matrix_rows(partition.lower);
  j["upper_corners"] = matrix_rows(partition.upper);
  return j;
}

BoxPartition partition_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "robarb.partition/1") throw InputError("unknown partition schema");
  BoxPartition p;
  p.bounds.lower = to_vector(j.at("bounds").at("lower"));
  p.bounds.upper = to_vector(j.at("bounds").at("upper"));
  p.bounds.delta = j.at("bounds").at("delta").get<double>();
  const auto& lo = j.at("lower_corners");
  const auto& hi = j.at("upper_corners");
  const auto depth = static_cast<Eigen::Index>(lo.size());
  p.lower.resize(depth, p.bounds.assets());
  p.upper.resize(depth, p.bounds.assets());
  for (Eigen::Index i = 0; i < depth; ++i) {
    p.lower.row(i) = to_vector(lo.at(static_cast<std::size_t>(i))).transpose();
    p.upper.row(i) = to_vector(hi.at(static_cast<std::size_t>(i))).transpose();
  }
  return p;
}

}  // namespace robarb
