#include "rpres/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"
#include "rpres/error.hpp"

namespace rpres {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void io_fail(const fs::path& path, const std::string& msg) {
  fail(ErrorKind::Io, path.string() + ": " + msg);
}

void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

template <typename T> void append_int(std::string& out, T v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

// Splits a CSV line on commas into at most `n` fields; returns the count.
std::size_t split_fields(std::string_view line, std::string_view* fields, std::size_t n) {
  std::size_t count = 0;
  std::size_t start = 0;
  while (count < n) {
    const auto comma = line.find(',', start);
    fields[count++] = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return count;
}

double parse_double(std::string_view s, const fs::path& path, std::size_t line) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    io_fail(path, "line " + std::to_string(line) + ": malformed number '" + std::string(s) + "'");
  return v;
}

std::int64_t parse_int(std::string_view s, const fs::path& path, std::size_t line) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    io_fail(path, "line " + std::to_string(line) + ": malformed integer '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> lines_of(const std::string& text) {
  std::vector<std::string_view> out;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    out.push_back(rest.substr(0, nl));
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  return out;
}

json grid_json(const GridSpec& g) {
  return {{"lo", g.lo}, {"hi", g.hi}, {"n_per_dim", g.n_per_dim}};
}

GridSpec grid_from(const json& j) {
  GridSpec g;
  g.lo = j.at("lo").get<std::array<double, 2>>();
  g.hi = j.at("hi").get<std::array<double, 2>>();
  g.n_per_dim = j.at("n_per_dim").get<std::array<std::int64_t, 2>>();
  g.validate();
  return g;
}

json hopf_json(const HopfParams& p) {
  return {{"delta", p.delta}, {"gamma", p.gamma}, {"beta", p.beta}, {"epsilon", p.epsilon}};
}

HopfParams hopf_from(const json& j) {
  HopfParams p;
  p.delta = j.at("delta").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.beta = j.at("beta").get<double>();
  p.epsilon = j.at("epsilon").get<double>();
  return p;
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }
cplx cplx_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json parse_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    io_fail(path, std::string("invalid JSON: ") + e.what());
  }
}

} // namespace

std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for checksum");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) io_fail(tmp, "cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) io_fail(tmp, "write failed");
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj,
                          const std::string& time_unit_label) {
  std::string out;
  out.reserve(traj.size() * 64 + 32);
  out += time_unit_label.empty() ? "t" : "t[" + time_unit_label + "]";
  out += ",x,y\n";
  for (std::size_t n = 0; n < traj.size(); ++n) {
    append_double(out, static_cast<double>(n) * traj.sampling_interval);
    out += ',';
    append_double(out, traj.states[n][0]);
    out += ',';
    append_double(out, traj.states[n][1]);
    out += '\n';
  }
  write_text_atomic(path, out);
}

Trajectory read_trajectory_csv(const fs::path& path) {
  const std::string text = read_text(path);
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0].substr(0, 1) != "t") io_fail(path, "missing `t,x,y` header");
  Trajectory traj;
  traj.states.reserve(lines.size());
  double t1 = 0.0;
  std::string_view f[3];
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (split_fields(lines[i], f, 3) != 3) io_fail(path, "line " + std::to_string(i + 1) + ": expected 3 fields");
    const double t = parse_double(f[0], path, i + 1);
    if (traj.states.size() == 1) t1 = t;
    traj.states.push_back({parse_double(f[1], path, i + 1), parse_double(f[2], path, i + 1)});
  }
  if (traj.states.empty()) io_fail(path, "no samples");
  traj.sampling_interval = traj.states.size() > 1 ? t1 : 1.0;
  if (!(traj.sampling_interval > 0.0)) io_fail(path, "non-increasing time column");
  return traj;
}

void write_density_csv(const fs::path& path, const SojournDensity& m) {
  std::string out = "box,m\n";
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    append_int(out, i);
    out += ',';
    append_double(out, m.values[i]);
    out += '\n';
  }
  write_text_atomic(path, out);
}

SojournDensity read_density_csv(const fs::path& path) {
  const std::string text = read_text(path);
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0].substr(0, 5) != "box,m") io_fail(path, "missing `box,m` header");
  SojournDensity m;
  std::string_view f[2];
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (split_fields(lines[i], f, 2) != 2) io_fail(path, "line " + std::to_string(i + 1) + ": expected 2 fields");
    const auto box = parse_int(f[0], path, i + 1);
    if (box != static_cast<std::int64_t>(m.values.size())) io_fail(path, "boxes must be listed in order");
    m.values.push_back(parse_double(f[1], path, i + 1));
  }
  return m;
}

void write_matrix_file(const fs::path& path, const TransitionMatrix& T, const GridSpec& grid,
                       const Standardization& affine) {
  const json header = {
      {"lag", T.lag},
      {"lag_steps", T.lag_steps},
      {"dim", T.dim()},
      {"full_dim", T.full_dim},
      {"kept_boxes", T.kept_boxes},
      {"grid", grid_json(grid)},
      {"standardization", {{"mean", affine.mean}, {"stddev", affine.stddev}}},
  };
  std::string out = "# " + header.dump() + "\ni,j,p\n";
  const auto& cp = T.matrix.col_ptr();
  const auto& ri = T.matrix.row_idx();
  const auto& vals = T.matrix.values();
  for (std::int64_t j = 0; j < T.matrix.dim(); ++j) {
    for (auto k = cp[j]; k < cp[j + 1]; ++k) {
      append_int(out, T.kept_boxes[static_cast<std::size_t>(ri[k])]);
      out += ',';
      append_int(out, T.kept_boxes[static_cast<std::size_t>(j)]);
      out += ',';
      append_double(out, vals[k]);
      out += '\n';
    }
  }
  write_text_atomic(path, out);
}

MatrixFile read_matrix_file(const fs::path& path) {
  const std::string text = read_text(path);
  const auto lines = lines_of(text);
  if (lines.size() < 2 || lines[0].substr(0, 2) != "# ") io_fail(path, "missing JSON header line");
  json header;
  try {
    header = json::parse(lines[0].substr(2));
  } catch (const json::exception& e) {
    io_fail(path, std::string("invalid header: ") + e.what());
  }
  MatrixFile mf;
  mf.grid = grid_from(header.at("grid"));
  mf.affine.mean = header.at("standardization").at("mean").get<std::array<double, 2>>();
  mf.affine.stddev = header.at("standardization").at("stddev").get<std::array<double, 2>>();
  auto& T = mf.matrix;
  T.lag = header.at("lag").get<double>();
  T.lag_steps = header.at("lag_steps").get<std::int64_t>();
  T.full_dim = header.at("full_dim").get<std::size_t>();
  T.kept_boxes = header.at("kept_boxes").get<std::vector<BoxIndex>>();
  if (T.kept_boxes.size() != header.at("dim").get<std::size_t>()) io_fail(path, "dim disagrees with kept_boxes");
  std::vector<std::int64_t> local(T.full_dim, -1);
  for (std::size_t i = 0; i < T.kept_boxes.size(); ++i) {
    if (T.kept_boxes[i] >= T.full_dim || (i > 0 && T.kept_boxes[i] <= T.kept_boxes[i - 1]))
      io_fail(path, "kept_boxes must be strictly increasing and inside the grid");
    local[T.kept_boxes[i]] = static_cast<std::int64_t>(i);
  }
  if (lines[1].substr(0, 5) != "i,j,p") io_fail(path, "missing `i,j,p` header");
  std::vector<Triplet> trip;
  std::string_view f[3];
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (split_fields(lines[i], f, 3) != 3) io_fail(path, "line " + std::to_string(i + 1) + ": expected 3 fields");
    const auto bi = parse_int(f[0], path, i + 1);
    const auto bj = parse_int(f[1], path, i + 1);
    if (bi < 0 || bj < 0 || static_cast<std::size_t>(bi) >= T.full_dim || static_cast<std::size_t>(bj) >= T.full_dim ||
        local[static_cast<std::size_t>(bi)] < 0 || local[static_cast<std::size_t>(bj)] < 0)
      io_fail(path, "line " + std::to_string(i + 1) + ": box outside the kept set");
    trip.push_back({local[static_cast<std::size_t>(bi)], local[static_cast<std::size_t>(bj)],
                    parse_double(f[2], path, i + 1)});
  }
  T.matrix = CscMatrix(static_cast<std::int64_t>(T.kept_boxes.size()), std::move(trip));
  return mf;
}

void write_vector_csv(const fs::path& path, std::span<const BoxIndex> boxes, const Eigen::VectorXcd& v) {
  if (static_cast<std::size_t>(v.size()) != boxes.size())
    fail(ErrorKind::Length, "write_vector_csv: vector length differs from box list");
  std::string out = "box,re,im\n";
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    append_int(out, boxes[i]);
    out += ',';
    append_double(out, v[static_cast<Eigen::Index>(i)].real());
    out += ',';
    append_double(out, v[static_cast<Eigen::Index>(i)].imag());
    out += '\n';
  }
  write_text_atomic(path, out);
}

std::pair<std::vector<BoxIndex>, Eigen::VectorXcd> read_vector_csv(const fs::path& path) {
  const std::string text = read_text(path);
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0].substr(0, 9) != "box,re,im") io_fail(path, "missing `box,re,im` header");
  std::vector<BoxIndex> boxes;
  std::vector<cplx> vals;
  std::string_view f[3];
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (split_fields(lines[i], f, 3) != 3) io_fail(path, "line " + std::to_string(i + 1) + ": expected 3 fields");
    boxes.push_back(static_cast<BoxIndex>(parse_int(f[0], path, i + 1)));
    vals.emplace_back(parse_double(f[1], path, i + 1), parse_double(f[2], path, i + 1));
  }
  Eigen::VectorXcd v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return {std::move(boxes), std::move(v)};
}

std::vector<fs::path> write_resonance_json(const fs::path& path, const ResonanceFile& file) {
  const fs::path vec_dir_name = path.stem().string() + "_vectors";
  const fs::path vec_dir = path.parent_path() / vec_dir_name;
  std::vector<fs::path> written;
  json records = json::array();
  for (std::size_t j = 0; j < file.set.resonances.size(); ++j) {
    const auto& r = file.set.resonances[j];
    char name[32];
    std::snprintf(name, sizeof(name), "r%03zu", j);
    const fs::path right = vec_dir_name / (std::string(name) + "_right.csv");
    const fs::path left = vec_dir_name / (std::string(name) + "_left.csv");
    write_vector_csv(path.parent_path() / right, file.kept_boxes, r.right);
    write_vector_csv(path.parent_path() / left, file.kept_boxes, r.left);
    written.push_back(path.parent_path() / right);
    written.push_back(path.parent_path() / left);
    json rec = {
        {"re_lambda", r.lambda.real()},
        {"im_lambda", r.lambda.imag()},
        {"kappa", r.kappa},
        {"pair_quality", r.pair_quality},
        {"weight", nullptr},
        {"re_lambda_single", r.lambda_single.real()},
        {"im_lambda_single", r.lambda_single.imag()},
        {"zeta_a", cplx_json(r.zeta_a)},
        {"zeta_b", cplx_json(r.zeta_b)},
        {"vector_file", {{"right", right.generic_string()}, {"left", left.generic_string()}}},
    };
    if (j < file.weights.size() && file.weights[j]) rec["weight"] = cplx_json(*file.weights[j]);
    if (!std::isfinite(r.kappa)) rec["kappa"] = nullptr;
    records.push_back(std::move(rec));
  }
  auto single = [](const std::vector<cplx>& v) {
    json a = json::array();
    for (const auto& z : v) a.push_back({{"re_lambda", z.real()}, {"im_lambda", z.imag()}});
    return a;
  };
  const json doc = {
      {"schema_version", 1},
      {"hopf", hopf_json(file.hopf)},
      {"grid", grid_json(file.grid)},
      {"lag", file.set.lag},
      {"dlag", file.set.dlag},
      {"kept_boxes", file.kept_boxes.size()},
      {"resonances", std::move(records)},
      {"single_lag", {{"tau", single(file.single_lag_a)}, {"tau_plus_dtau", single(file.single_lag_b)}}},
      {"unmatched_a", file.set.unmatched_a},
      {"unmatched_b", file.set.unmatched_b},
  };
  write_text_atomic(path, doc.dump(2) + "\n");
  written.push_back(path);
  return written;
}

ResonanceFile read_resonance_json(const fs::path& path, bool load_vectors) {
  const json doc = parse_json(path);
  ResonanceFile f;
  try {
    f.hopf = hopf_from(doc.at("hopf"));
    f.grid = grid_from(doc.at("grid"));
    f.set.lag = doc.at("lag").get<double>();
    f.set.dlag = doc.at("dlag").get<double>();
    f.set.unmatched_a = doc.at("unmatched_a").get<std::vector<int>>();
    f.set.unmatched_b = doc.at("unmatched_b").get<std::vector<int>>();
    for (const auto& s : doc.at("single_lag").at("tau"))
      f.single_lag_a.emplace_back(s.at("re_lambda").get<double>(), s.at("im_lambda").get<double>());
    for (const auto& s : doc.at("single_lag").at("tau_plus_dtau"))
      f.single_lag_b.emplace_back(s.at("re_lambda").get<double>(), s.at("im_lambda").get<double>());
    for (const auto& rec : doc.at("resonances")) {
      Resonance r;
      r.lambda = {rec.at("re_lambda").get<double>(), rec.at("im_lambda").get<double>()};
      r.lambda_single = {rec.at("re_lambda_single").get<double>(), rec.at("im_lambda_single").get<double>()};
      r.zeta_a = cplx_from(rec.at("zeta_a"));
      r.zeta_b = cplx_from(rec.at("zeta_b"));
      r.kappa = rec.at("kappa").is_null() ? std::numeric_limits<double>::infinity() : rec.at("kappa").get<double>();
      r.pair_quality = rec.at("pair_quality").get<double>();
      const auto& w = rec.at("weight");
      f.weights.push_back(w.is_null() ? std::nullopt : std::optional<cplx>(cplx_from(w)));
      if (load_vectors) {
        auto [rb, rv] = read_vector_csv(path.parent_path() / rec.at("vector_file").at("right").get<std::string>());
        auto [lb, lv] = read_vector_csv(path.parent_path() / rec.at("vector_file").at("left").get<std::string>());
        if (rb != lb) io_fail(path, "left and right vector files list different boxes");
        if (f.kept_boxes.empty()) f.kept_boxes = rb;
        else if (f.kept_boxes != rb) io_fail(path, "eigenvector files disagree on the kept boxes");
        r.right = std::move(rv);
        r.left = std::move(lv);
      }
      f.set.resonances.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    io_fail(path, std::string("schema error: ") + e.what());
  }
  return f;
}

void write_oracle_json(const fs::path& path, const OracleFile& file) {
  json entries = json::array();
  for (const auto& e : file.lattice.entries)
    entries.push_back({{"l", e.l}, {"n", e.n}, {"index", e.index}, {"re_lambda", e.lambda.real()},
                       {"im_lambda", e.lambda.imag()}, {"multiplicity", e.multiplicity}});
  json doc = {
      {"schema_version", 1},
      {"regime", file.lattice.regime == Regime::Subcritical ? "subcritical" : "supercritical"},
      {"hopf", hopf_json(file.hopf)},
      {"lattice", std::move(entries)},
  };
  if (file.floquet) {
    const auto& fd = *file.floquet;
    doc["floquet"] = {
        {"T", fd.period},
        {"omega", fd.omega},
        {"exponents", fd.floquet_exponents},
        {"phi_numeric", fd.phi},
        {"phi_analytic", file.phi_analytic ? json(*file.phi_analytic) : json(nullptr)},
    };
  }
  write_text_atomic(path, doc.dump(2) + "\n");
}

OracleFile read_oracle_json(const fs::path& path) {
  const json doc = parse_json(path);
  OracleFile f;
  try {
    f.hopf = hopf_from(doc.at("hopf"));
    const auto regime = doc.at("regime").get<std::string>();
    if (regime == "subcritical") f.lattice.regime = Regime::Subcritical;
    else if (regime == "supercritical") f.lattice.regime = Regime::Supercritical;
    else io_fail(path, "unknown regime '" + regime + "'");
    for (const auto& e : doc.at("lattice")) {
      LatticeEntry le;
      le.l = e.at("l").get<int>();
      le.n = e.at("n").get<int>();
      le.index = e.at("index").get<std::vector<int>>();
      le.lambda = {e.at("re_lambda").get<double>(), e.at("im_lambda").get<double>()};
      le.multiplicity = e.at("multiplicity").get<int>();
      f.lattice.entries.push_back(std::move(le));
    }
    if (doc.contains("floquet")) {
      const auto& fj = doc.at("floquet");
      FloquetData fd;
      fd.period = fj.at("T").get<double>();
      fd.omega = fj.at("omega").get<double>();
      fd.floquet_exponents = fj.at("exponents").get<std::array<double, 2>>();
      fd.phi = fj.at("phi_numeric").get<double>();
      f.floquet = fd;
      if (!fj.at("phi_analytic").is_null()) f.phi_analytic = fj.at("phi_analytic").get<double>();
    }
  } catch (const json::exception& e) {
    io_fail(path, std::string("schema error: ") + e.what());
  }
  return f;
}

} // namespace rpres
