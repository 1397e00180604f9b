#include "lfgt/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lfgt {
namespace fs = std::filesystem;

namespace {

struct RawPnm {
  std::string magic;
  int width = 0;
  int height = 0;
  long maxval = 0;
  std::vector<unsigned char> payload;
};

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int parse_int(const std::string& tok, const fs::path& file) {
  try {
    std::size_t used = 0;
    const long value = std::stol(tok, &used);
    if (used != tok.size() || value < 0 || value > (1L << 30)) throw std::invalid_argument(tok);
    return static_cast<int>(value);
  } catch (const std::exception&) {
    throw FormatError("malformed header in " + file.string());
  }
}

RawPnm read_raw_pgm(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot open " + file.string());
  RawPnm raw;
  raw.magic = next_token(in);
  if (raw.magic != "P5") throw FormatError(file.string() + " is not a binary PGM (P5)");
  raw.width = parse_int(next_token(in), file);
  raw.height = parse_int(next_token(in), file);
  raw.maxval = parse_int(next_token(in), file);
  if (raw.maxval < 1 || raw.maxval > 65535) throw FormatError("bad maxval in " + file.string());
  const std::size_t bytes = static_cast<std::size_t>(raw.width) * raw.height *
                            (raw.maxval > 255 ? 2 : 1);
  raw.payload.resize(bytes);
  in.read(reinterpret_cast<char*>(raw.payload.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes)
    throw FormatError("truncated pixel data in " + file.string());
  return raw;
}

void write_text_file(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << text;
}

}  // namespace

std::string view_file_name(int u, int v) {
  return "view_" + std::to_string(u) + "_" + std::to_string(v) + ".pgm";
}

Image read_pgm(const fs::path& file) {
  const RawPnm raw = read_raw_pgm(file);
  if (raw.maxval != 255) throw FormatError("unsupported maxval " + std::to_string(raw.maxval) +
                                           " in " + file.string());
  Image image(raw.height, raw.width);
  for (std::size_t i = 0; i < image.size(); ++i) image[i] = raw.payload[i];
  return image;
}

void write_pgm8(const fs::path& file, const Image& image) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << "P5\n" << image.cols() << " " << image.rows() << "\n255\n";
  std::vector<unsigned char> bytes(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double s = std::round(image[i]);
    bytes[i] = static_cast<unsigned char>(s < 0 ? 0 : (s > 255 ? 255 : s));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_pgm16(const fs::path& file, const Grid<int>& labels) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << "P5\n" << labels.cols() << " " << labels.rows() << "\n65535\n";
  std::vector<unsigned char> bytes(labels.size() * 2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] > 65535) throw Error("label out of 16-bit range");
    bytes[2 * i] = static_cast<unsigned char>(labels[i] >> 8);
    bytes[2 * i + 1] = static_cast<unsigned char>(labels[i] & 0xFF);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Grid<int> read_pgm16(const fs::path& file) {
  const RawPnm raw = read_raw_pgm(file);
  Grid<int> labels(raw.height, raw.width);
  if (raw.maxval <= 255) {
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = raw.payload[i];
  } else {
    for (std::size_t i = 0; i < labels.size(); ++i)
      labels[i] = (raw.payload[2 * i] << 8) | raw.payload[2 * i + 1];
  }
  return labels;
}

Grid<double> read_pfm(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot open " + file.string());
  const std::string magic = next_token(in);
  if (magic != "Pf") throw FormatError(file.string() + " is not a grayscale PFM");
  const int width = parse_int(next_token(in), file);
  const int height = parse_int(next_token(in), file);
  const double scale = std::stod(next_token(in));
  const bool little = scale < 0;
  Grid<double> image(height, width);
  std::vector<unsigned char> row(static_cast<std::size_t>(width) * 4);
  for (int r = height - 1; r >= 0; --r) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (static_cast<std::size_t>(in.gcount()) != row.size())
      throw FormatError("truncated PFM " + file.string());
    for (int c = 0; c < width; ++c) {
      unsigned char b[4];
      std::memcpy(b, &row[static_cast<std::size_t>(c) * 4], 4);
      const std::uint32_t bits =
          little ? (b[0] | (b[1] << 8) | (b[2] << 16) | (std::uint32_t(b[3]) << 24))
                 : (b[3] | (b[2] << 8) | (b[1] << 16) | (std::uint32_t(b[0]) << 24));
      float f;
      std::memcpy(&f, &bits, 4);
      image(r, c) = f;
    }
  }
  return image;
}

void write_pfm(const fs::path& file, const Grid<double>& image) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << "Pf\n" << image.cols() << " " << image.rows() << "\n-1.0\n";
  for (int r = image.rows() - 1; r >= 0; --r)
    for (int c = 0; c < image.cols(); ++c) {
      const float f = static_cast<float>(image(r, c));
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      const unsigned char b[4] = {static_cast<unsigned char>(bits & 0xFF),
                                  static_cast<unsigned char>((bits >> 8) & 0xFF),
                                  static_cast<unsigned char>((bits >> 16) & 0xFF),
                                  static_cast<unsigned char>(bits >> 24)};
      out.write(reinterpret_cast<const char*>(b), 4);
    }
}

LightFieldMetadata read_metadata(const fs::path& directory) {
  const fs::path file = directory / "metadata.json";
  std::ifstream in(file);
  if (!in) throw FormatError("missing metadata file " + file.string());
  LightFieldMetadata meta;
  try {
    const auto j = nlohmann::json::parse(in);
    meta.n_u = j.at("n_u").get<int>();
    meta.n_v = j.at("n_v").get<int>();
    meta.width = j.at("width").get<int>();
    meta.height = j.at("height").get<int>();
    meta.bitdepth = j.value("bitdepth", 8);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed metadata " + file.string() + ": " + e.what());
  }
  if (meta.n_u < 1 || meta.n_v < 1 || meta.width < 1 || meta.height < 1)
    throw FormatError("metadata dimensions must be at least 1");
  if (meta.bitdepth != 8) throw FormatError("unsupported bit depth " + std::to_string(meta.bitdepth));
  return meta;
}

LightField load_light_field(const fs::path& directory) {
  const LightFieldMetadata meta = read_metadata(directory);
  std::vector<Image> views;
  views.reserve(static_cast<std::size_t>(meta.n_u) * meta.n_v);
  for (int u = 0; u < meta.n_u; ++u)
    for (int v = 0; v < meta.n_v; ++v) {
      const fs::path file = directory / view_file_name(u, v);
      if (!fs::exists(file)) throw FormatError("missing view file " + file.string());
      Image view = read_pgm(file);
      if (view.rows() != meta.height || view.cols() != meta.width)
        throw FormatError("dimension mismatch between metadata and " + file.string());
      views.push_back(std::move(view));
    }
  return LightField(meta.n_u, meta.n_v, std::move(views));
}

void save_light_field(const fs::path& directory, const LightField& lf) {
  fs::create_directories(directory);
  nlohmann::json meta = {{"n_u", lf.n_u()},     {"n_v", lf.n_v()}, {"width", lf.width()},
                         {"height", lf.height()}, {"bitdepth", 8}};
  write_text_file(directory / "metadata.json", meta.dump(2) + "\n");
  for (int u = 0; u < lf.n_u(); ++u)
    for (int v = 0; v < lf.n_v(); ++v) write_pgm8(directory / view_file_name(u, v), lf.view(u, v));
}

std::optional<DisparityMap> load_disparity(const fs::path& directory) {
  const fs::path file = directory / "disparity.pfm";
  if (!fs::exists(file)) return std::nullopt;
  return read_pfm(file);
}

void save_disparity(const fs::path& directory, const DisparityMap& disparity) {
  fs::create_directories(directory);
  write_pfm(directory / "disparity.pfm", disparity);
}

}  // namespace lfgt
