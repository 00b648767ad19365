#include "smm/model_file.hpp"

#include <json.hpp>

#include "smm/csv.hpp"
#include "smm/errors.hpp"

namespace smm {
namespace {

using Json = nlohmann::ordered_json;

const Json& require(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw InputError(std::string("model file: missing field '") + key + "'");
  return doc.at(key);
}

template <typename T>
T get(const Json& doc, const char* key) {
  try {
    return require(doc, key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("model file: field '") + key + "' has the wrong type");
  }
}

std::vector<double> number_array(const Json& value, const char* what) {
  if (!value.is_array()) throw InputError(std::string("model file: ") + what + " must be an array");
  std::vector<double> out;
  for (const auto& v : value) {
    if (!v.is_number()) throw InputError(std::string("model file: ") + what + " must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

std::string model_to_json(const ModelParams& params, const ModelMetadata& metadata) {
  const auto& family = params.family();
  const int n = params.ambient_dim();
  const int m = params.vertex_count();
  Json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["k"] = family.dimension();
  doc["m"] = m;
  doc["n"] = n;
  doc["family"] = {{"k", family.dimension()}, {"m", family.vertex_count()}};

  Json p = Json::array();
  for (std::size_t s = 0; s < family.size(); ++s) {
    const double w = params.p()(static_cast<Eigen::Index>(s));
    if (w == 0.0) continue;
    Json label = Json::array();
    for (int v : family.indices(s)) label.push_back(v + 1);
    p.push_back({{"simplex", label}, {"weight", w}});
  }
  doc["p"] = p;

  Json v_data = Json::array();
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < m; ++c) v_data.push_back(params.vertices()(r, c));
  doc["V"] = {{"rows", n}, {"cols", m}, {"data", v_data}};

  const Eigen::VectorXd sigma = params.sigma().parameters();
  Json sigma_data;
  if (params.sigma().mode() == SigmaMode::Isotropic) {
    sigma_data = sigma(0);
  } else {
    sigma_data = Json::array();
    for (double v : sigma) sigma_data.push_back(v);
  }
  doc["sigma"] = {{"mode", std::string(to_string(params.sigma().mode()))}, {"data", sigma_data}};

  Json meta = Json::object();
  if (metadata.seed) meta["seed"] = *metadata.seed;
  if (metadata.fit_mode) meta["fit_mode"] = *metadata.fit_mode;
  if (metadata.regime) meta["regime"] = *metadata.regime;
  if (metadata.iterations) meta["iterations"] = *metadata.iterations;
  if (metadata.encoding_rate) meta["encoding_rate"] = *metadata.encoding_rate;
  if (metadata.log_likelihood) meta["log_likelihood"] = *metadata.log_likelihood;
  doc["metadata"] = meta;
  return doc.dump(2) + "\n";
}

ModelFile model_from_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("model file: invalid JSON: ") + e.what());
  }
  const int version = get<int>(doc, "schema_version");
  if (version != kModelSchemaVersion)
    throw InputError("model file: unsupported schema_version " + std::to_string(version));

  const Json& fam = require(doc, "family");
  const int k = get<int>(fam, "k");
  const int m = get<int>(fam, "m");
  const int n = get<int>(doc, "n");
  if (k < 0 || m < 1 || n < 1) throw InputError("model file: invalid dimensions");
  if (get<int>(doc, "k") != k || get<int>(doc, "m") != m) throw InputError("model file: k or m disagrees with family");
  FamilyPtr family = enumerate_simplices(k, m);

  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(family->size()));
  const Json& p_list = require(doc, "p");
  if (!p_list.is_array()) throw InputError("model file: p must be an array");
  for (const auto& entry : p_list) {
    std::vector<int> label;
    try {
      label = entry.at("simplex").get<std::vector<int>>();
    } catch (const nlohmann::json::exception&) {
      throw InputError("model file: malformed p entry");
    }
    for (int& v : label) {
      if (v < 1 || v > m) throw InputError("model file: simplex vertex out of range");
      --v;
    }
    const std::size_t s = family->index_of(CombinatorialSimplex::from_indices(label, m));
    p(static_cast<Eigen::Index>(s)) += get<double>(entry, "weight");
  }

  const Json& v = require(doc, "V");
  if (get<int>(v, "rows") != n || get<int>(v, "cols") != m) throw InputError("model file: V has the wrong shape");
  const auto v_data = number_array(require(v, "data"), "V.data");
  if (v_data.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(m))
    throw InputError("model file: V.data has the wrong length");
  Eigen::MatrixXd vertices(n, m);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < m; ++c) vertices(r, c) = v_data[static_cast<std::size_t>(r * m + c)];

  const Json& sigma = require(doc, "sigma");
  const SigmaMode mode = parse_sigma_mode(get<std::string>(sigma, "mode"));
  const Json& sigma_data = require(sigma, "data");
  NoiseCovariance noise = NoiseCovariance::isotropic(n, 1.0);
  if (mode == SigmaMode::Isotropic) {
    if (!sigma_data.is_number()) throw InputError("model file: isotropic sigma must be a number");
    noise = NoiseCovariance::isotropic(n, sigma_data.get<double>());
  } else {
    const auto values = number_array(sigma_data, "sigma.data");
    if (mode == SigmaMode::Diagonal) {
      if (values.size() != static_cast<std::size_t>(n)) throw InputError("model file: sigma.data has the wrong length");
      noise = NoiseCovariance::diagonal(Eigen::Map<const Eigen::VectorXd>(values.data(), n));
    } else {
      if (values.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw InputError("model file: sigma.data has the wrong length");
      noise = NoiseCovariance::full(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          values.data(), n, n));
    }
  }

  ModelMetadata meta;
  if (doc.contains("metadata")) {
    const Json& md = doc.at("metadata");
    try {
      if (md.contains("seed")) meta.seed = md.at("seed").get<std::uint64_t>();
      if (md.contains("fit_mode")) meta.fit_mode = md.at("fit_mode").get<std::string>();
      if (md.contains("regime")) meta.regime = md.at("regime").get<std::string>();
      if (md.contains("iterations")) meta.iterations = md.at("iterations").get<int>();
      if (md.contains("encoding_rate")) meta.encoding_rate = md.at("encoding_rate").get<double>();
      if (md.contains("log_likelihood")) meta.log_likelihood = md.at("log_likelihood").get<double>();
    } catch (const nlohmann::json::exception&) {
      throw InputError("model file: malformed metadata");
    }
  }
  return {ModelParams(family, std::move(p), std::move(vertices), std::move(noise)), meta};
}

void save_model(const std::filesystem::path& path, const ModelParams& params, const ModelMetadata& metadata) {
  write_file(path, model_to_json(params, metadata));
}

ModelFile load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace smm
