#include "robarb/checkpoint.hpp"

#include <fstream>

#include "robarb/errors.hpp"

namespace robarb {

namespace {

using json = nlohmann::json;

template <typename Derived>
json flat(const Eigen::DenseBase<Derived>& m) {
  json arr = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) arr.push_back(static_cast<double>(m(r, c)));
  return arr;
}

json layer_json(const DenseLayer<Real>& l) {
  return {{"rows", l.weight.rows()}, {"cols", l.weight.cols()}, {"weight", flat(l.weight)}, {"bias", flat(l.bias)}};
}

VectorX<Real> read_vector(const json& arr, Eigen::Index expected, const char* what) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != expected)
    throw InputError(std::string("checkpoint field '") + what + "' has the wrong length");
  VectorX<Real> v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v[i] = static_cast<Real>(arr[static_cast<std::size_t>(i)].get<double>());
  return v;
}

DenseLayer<Real> read_layer(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (j.at("rows").get<Eigen::Index>() != rows || j.at("cols").get<Eigen::Index>() != cols)
    throw InputError("checkpoint layer shape does not match the architecture");
  DenseLayer<Real> l;
  l.weight = read_vector(j.at("weight"), rows * cols, "weight").reshaped(rows, cols);
  l.bias = read_vector(j.at("bias"), rows, "bias");
  return l;
}

Eigen::VectorXd read_doubles(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

}  // namespace

json checkpoint_json(const Checkpoint& cp) {
  const auto& net = cp.net;
  json j;
  j["schema"] = kCheckpointSchema;
  j["assets"] = net.assets;
  j["horizon"] = net.horizon;
  j["bound"] = static_cast<double>(net.bound);
  j["hidden_widths"] = net.hidden_widths;
  j["tickers"] = cp.tickers;
  j["config_hash"] = cp.config_hash;
  j["cash"] = static_cast<double>(net.cash);
  j["delta0"] = flat(net.delta0);
  json nets = json::array();
  for (const auto& p : net.nets) {
    json hidden = json::array();
    for (const auto& l : p.hidden) hidden.push_back(layer_json(l));
    nets.push_back({{"input_dim", p.input_dim()},
                    {"norm_state",
                     {{"scale", flat(p.norm.scale)},
                      {"shift", flat(p.norm.shift)},
                      {"running_mean", flat(p.norm.running_mean)},
                      {"running_var", flat(p.norm.running_var)}}},
                    {"hidden", std::move(hidden)},
                    {"head", layer_json(p.head)}});
  }
  j["nets"] = std::move(nets);
  j["bounds"] = {{"lower", flat(cp.bounds.lower)}, {"upper", flat(cp.bounds.upper)}, {"delta", cp.bounds.delta}};
  j["partition"] = to_json(cp.partition);
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (j.value("schema", "") != kCheckpointSchema) throw CompatibilityError("unsupported checkpoint schema");
    Checkpoint cp;
    auto& net = cp.net;
    net.assets = j.at("assets").get<int>();
    net.horizon = j.at("horizon").get<int>();
    net.bound = static_cast<Real>(j.at("bound").get<double>());
    net.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
    if (net.assets < 1 || net.horizon < 1 || !(net.bound > 0)) throw InputError("invalid checkpoint shape");
    cp.tickers = j.at("tickers").get<std::vector<std::string>>();
    cp.config_hash = j.at("config_hash").get<std::string>();
    net.cash = static_cast<Real>(j.at("cash").get<double>());
    net.delta0 = read_vector(j.at("delta0"), net.assets, "delta0");

    const auto& nets = j.at("nets");
    if (static_cast<int>(nets.size()) != net.horizon - 1) throw InputError("checkpoint has the wrong number of nets");
    for (int i = 1; i < net.horizon; ++i) {
      const auto& jn = nets[static_cast<std::size_t>(i - 1)];
      const Eigen::Index in = static_cast<Eigen::Index>(i) * net.assets;
      PositionNet<Real> p;
      const auto& ns = jn.at("norm_state");
      p.norm.scale = read_vector(ns.at("scale"), in, "scale");
      p.norm.shift = read_vector(ns.at("shift"), in, "shift");
      p.norm.running_mean = read_vector(ns.at("running_mean"), in, "running_mean");
      p.norm.running_var = read_vector(ns.at("running_var"), in, "running_var");
      const auto& hidden = jn.at("hidden");
      if (hidden.size() != net.hidden_widths.size()) throw InputError("checkpoint layer count mismatch");
      Eigen::Index prev = in;
      for (std::size_t k = 0; k < hidden.size(); ++k) {
        p.hidden.push_back(read_layer(hidden[k], net.hidden_widths[k], prev));
        prev = net.hidden_widths[k];
      }
      p.head = read_layer(jn.at("head"), net.assets, prev);
      net.nets.push_back(std::move(p));
    }
    const auto& b = j.at("bounds");
    cp.bounds.lower = read_doubles(b.at("lower"));
    cp.bounds.upper = read_doubles(b.at("upper"));
    cp.bounds.delta = b.at("delta").get<double>();
    if (cp.bounds.assets() != net.assets || cp.bounds.upper.size() != net.assets)
      throw InputError("checkpoint bounds do not match the asset count");
    cp.partition = partition_from_json(j.at("partition"));
    return cp;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& cp) {
  std::ofstream out(file);
  if (!out) throw InputError("cannot write " + file.string());
  out << checkpoint_json(cp).dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("checkpoint not found: " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("checkpoint is not valid JSON: " + file.string());
  }
  return checkpoint_from_json(j);
}

void check_compatible(const StrategyNet& net, int assets, int horizon, double bound) {
  if (net.assets != assets || net.horizon != horizon || net.bound != static_cast<Real>(bound))
    throw CompatibilityError("checkpoint (d=" + std::to_string(net.assets) + ", n=" + std::to_string(net.horizon) +
                             ", B=" + std::to_string(static_cast<double>(net.bound)) +
                             ") does not match the configuration (d=" + std::to_string(assets) +
                             ", n=" + std::to_string(horizon) + ", B=" + std::to_string(bound) + ")");
}

}  // namespace robarb
