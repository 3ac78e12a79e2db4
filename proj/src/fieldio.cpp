#include "selpde/fieldio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace selpde {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for write: " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string field_to_string(const DiscreteField& f) {
  const Grid& g = *f.grid;
  std::ostringstream out;
  out << "# selpde-field v1\n";
  out << "dim=" << g.dim << "\n";
  switch (g.kind) {
    case GridKind::radial:
      out << "grid=radial\n";
      out << "R=" << format_g17(g.radius()) << "\n";
      out << "nodes=" << g.size() << "\n";
      for (std::size_t i = 0; i < g.size(); ++i)
        out << format_g17(g.xs[i]) << " " << format_g17(f.values[i]) << "\n";
      break;
    case GridKind::rect1d:
      out << "grid=rect1d\n";
      out << "bounds=" << format_g17(g.xs.front()) << "," << format_g17(g.xs.back()) << "\n";
      out << "nodes=" << g.size() << "\n";
      for (std::size_t i = 0; i < g.size(); ++i)
        out << format_g17(g.xs[i]) << " " << format_g17(f.values[i]) << "\n";
      break;
    case GridKind::rect2d:
      out << "grid=rect2d\n";
      out << "bounds=" << format_g17(g.xs.front()) << "," << format_g17(g.xs.back()) << ","
          << format_g17(g.ys.front()) << "," << format_g17(g.ys.back()) << "\n";
      out << "nodes=" << g.nx() << "," << g.ny() << "\n";
      for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i)
          out << format_g17(g.xs[i]) << " " << format_g17(g.ys[j]) << " "
              << format_g17(f.values[j * g.nx() + i]) << "\n";
      break;
  }
  return out.str();
}

void write_field_file(const std::string& path, const DiscreteField& f) {
  write_text_atomic(path, field_to_string(f));
}

DiscreteField read_field_file(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "# selpde-field v1")
    throw std::runtime_error(path + ": not a selpde-field v1 file");

  int dim = 0;
  std::string kind;
  std::size_t n1 = 0, n2 = 0;
  while (std::getline(in, line)) {
    if (line.rfind("dim=", 0) == 0) {
      dim = std::stoi(line.substr(4));
    } else if (line.rfind("grid=", 0) == 0) {
      kind = line.substr(5);
    } else if (line.rfind("R=", 0) == 0 || line.rfind("bounds=", 0) == 0) {
      // geometry is rebuilt from the coordinate column below
    } else if (line.rfind("nodes=", 0) == 0) {
      std::vector<std::string> parts = split(line.substr(6), ',');
      n1 = static_cast<std::size_t>(std::stoul(parts[0]));
      if (parts.size() > 1) n2 = static_cast<std::size_t>(std::stoul(parts[1]));
      break;
    } else {
      throw std::runtime_error(path + ": unexpected header line: " + line);
    }
  }
  if (dim <= 0 || n1 == 0) throw std::runtime_error(path + ": incomplete header");

  auto read_row = [&](int ncols, double* cols) {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated data");
    std::istringstream row(line);
    for (int c = 0; c < ncols; ++c)
      if (!(row >> cols[c])) throw std::runtime_error(path + ": bad data row: " + line);
  };

  if (kind == "radial" || kind == "rect1d") {
    std::vector<double> xs(n1), vals(n1);
    for (std::size_t i = 0; i < n1; ++i) {
      double cols[2];
      read_row(2, cols);
      xs[i] = cols[0];
      vals[i] = cols[1];
    }
    GridPtr g = (kind == "radial") ? make_radial_grid_from_nodes(xs, dim)
                                   : make_interval_grid_from_nodes(xs);
    DiscreteField f(g, 0.0);
    f.values = std::move(vals);
    return f;
  }
  if (kind == "rect2d") {
    if (n2 == 0) throw std::runtime_error(path + ": rect2d needs nodes=nx,ny");
    std::vector<double> xs(n1), ys(n2), vals(n1 * n2);
    for (std::size_t j = 0; j < n2; ++j) {
      for (std::size_t i = 0; i < n1; ++i) {
        double cols[3];
        read_row(3, cols);
        if (j == 0) xs[i] = cols[0];
        if (i == 0) ys[j] = cols[1];
        vals[j * n1 + i] = cols[2];
      }
    }
    GridPtr g = make_rect2d_grid_from_nodes(xs, ys);
    DiscreteField f(g, 0.0);
    f.values = std::move(vals);
    return f;
  }
  throw std::runtime_error(path + ": unknown grid kind: " + kind);
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::uint64_t hash_file(const std::string& path) { return fnv1a64(read_text_file(path)); }

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string csv_to_string(const CsvTable& t) {
  std::ostringstream out;
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    out << (c ? "," : "") << t.columns[c];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_g17(row[c]);
    out << "\n";
  }
  return out.str();
}

void write_csv_atomic(const std::string& path, const CsvTable& t) {
  write_text_atomic(path, csv_to_string(t));
}

}  // namespace selpde
