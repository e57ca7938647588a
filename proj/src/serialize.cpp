#include "resavg/serialize.hpp"

#include <fstream>

namespace resavg {

using nlohmann::json;

json series_to_json(const Series& f) {
  const int n = f.dim();
  json coeffs = json::array();
  for (ModeKey m : f.sorted_modes()) {
    const Coeff* c = f.find(m);
    if (!c->is_poly())
      throw std::invalid_argument("series_to_json: rational coefficients not serializable");
    YPoly p = c->as_poly();
    json terms = json::array();
    for (const auto& [deg, v] : p.terms()) {
      VectorXi d = YPoly::unpack(deg, n);
      terms.push_back({{"deg", std::vector<int>(d.data(), d.data() + n)},
                       {"re", v.real()},
                       {"im", v.imag()}});
    }
    VectorXi k = unpack_mode(m, n);
    coeffs.push_back(
        {{"k", std::vector<int>(k.data(), k.data() + n)}, {"poly", terms}});
  }
  return {{"n", n}, {"reality", f.reality()}, {"coeffs", coeffs}};
}

Series series_from_json(const json& j) {
  const int n = j.at("n").get<int>();
  Series f(n, j.at("reality").get<bool>());
  for (const auto& entry : j.at("coeffs")) {
    auto kv = entry.at("k").get<std::vector<int>>();
    if (int(kv.size()) != n) throw std::invalid_argument("series_from_json: bad mode length");
    VectorXi k = Eigen::Map<const VectorXi>(kv.data(), n);
    YPoly p;
    for (const auto& term : entry.at("poly")) {
      auto dv = term.at("deg").get<std::vector<int>>();
      if (int(dv.size()) != n)
        throw std::invalid_argument("series_from_json: bad degree length");
      VectorXi d = Eigen::Map<const VectorXi>(dv.data(), n);
      p.add_term(YPoly::pack(d),
                 cplx(term.at("re").get<double>(), term.at("im").get<double>()));
    }
    f.set_coeff(k, p);
  }
  return f;
}

std::string series_to_string(const Series& f) { return series_to_json(f).dump(2); }

Series series_from_string(const std::string& text) {
  return series_from_json(json::parse(text));
}

void save_series(const Series& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_series: cannot open " + path);
  out << series_to_string(f) << "\n";
}

Series load_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_series: cannot open " + path);
  json j;
  in >> j;
  return series_from_json(j);
}

}  // namespace resavg
