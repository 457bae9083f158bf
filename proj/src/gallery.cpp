#include "srcbench/gallery.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace srcbench {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const fs::path& p, const std::string& what) {
  throw std::runtime_error(p.string() + ": " + what);
}

// --- PGM --------------------------------------------------------------------

// Skips whitespace and '#' comment lines, then reads one ASCII token.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#')
        tok.push_back(static_cast<char>(in.get()));
      return tok;
    }
  }
  return tok;
}

Mat load_pgm(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(file, "cannot open");
  const std::string magic = pgm_token(in);
  if (magic != "P5" && magic != "P2") fail(file, "not a P5/P2 PGM");
  long w = 0, h = 0, maxval = 0;
  try {
    w = std::stol(pgm_token(in));
    h = std::stol(pgm_token(in));
    maxval = std::stol(pgm_token(in));
  } catch (const std::exception&) {
    fail(file, "malformed PGM header");
  }
  if (w <= 0 || h <= 0) fail(file, "bad PGM dimensions");
  if (maxval <= 0 || maxval > 255) fail(file, "expected 8-bit PGM (maxval <= 255)");

  Mat img(h, w);
  if (magic == "P5") {
    // exactly one whitespace byte separates the header from binary data
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep)) fail(file, "malformed PGM header");
    std::vector<unsigned char> row(static_cast<std::size_t>(w));
    for (long r = 0; r < h; ++r) {
      in.read(reinterpret_cast<char*>(row.data()), w);
      if (!in) fail(file, "truncated PGM pixel data");
      for (long c = 0; c < w; ++c)
        img(r, c) = row[static_cast<std::size_t>(c)] / static_cast<double>(maxval);
    }
  } else {
    for (long r = 0; r < h; ++r)
      for (long c = 0; c < w; ++c) {
        const std::string tok = pgm_token(in);
        if (tok.empty()) fail(file, "truncated PGM pixel data");
        img(r, c) = std::stol(tok) / static_cast<double>(maxval);
      }
  }
  return img;
}

// --- PNG --------------------------------------------------------------------

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

Mat load_png_gray(const fs::path& file) {
  PngReadCloser ctx;
  ctx.fp = std::fopen(file.string().c_str(), "rb");
  if (!ctx.fp) fail(file, "cannot open");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, ctx.fp) != 8 || png_sig_cmp(sig, 0, 8))
    fail(file, "not a PNG file");
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) fail(file, "libpng init failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) fail(file, "libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) fail(file, "libpng decode error");
  png_init_io(ctx.png, ctx.fp);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);

  const png_uint_32 w = png_get_image_width(ctx.png, ctx.info);
  const png_uint_32 h = png_get_image_height(ctx.png, ctx.info);
  if (png_get_color_type(ctx.png, ctx.info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(ctx.png, ctx.info) != 8)
    fail(file, "expected 8-bit grayscale PNG");

  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 r = 0; r < h; ++r)
    rows[r] = buf.data() + static_cast<std::size_t>(r) * w;
  png_read_image(ctx.png, rows.data());

  Mat img(static_cast<Index>(h), static_cast<Index>(w));
  for (png_uint_32 r = 0; r < h; ++r)
    for (png_uint_32 c = 0; c < w; ++c)
      img(static_cast<Index>(r), static_cast<Index>(c)) =
          buf[static_cast<std::size_t>(r) * w + c] / 255.0;
  return img;
}

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

unsigned char quantize(double v) {
  const double clamped = std::min(1.0, std::max(0.0, v));
  return static_cast<unsigned char>(std::lround(clamped * 255.0));
}

// --- directory traversal ----------------------------------------------------

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".png";
}

std::vector<fs::path> sorted_subdirs(const fs::path& root) {
  if (!fs::is_directory(root)) fail(root, "not a directory");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });
  return dirs;
}

std::vector<fs::path> sorted_images(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_image_file(entry.path()))
      files.push_back(entry.path());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });
  return files;
}

Vec load_column(const fs::path& file,
                std::optional<std::pair<Index, Index>> resize_to, Index& h,
                Index& w) {
  Mat img = load_image(file);
  if (resize_to) img = bilinear_resize(img, resize_to->first, resize_to->second);
  if (h == 0) {
    h = img.rows();
    w = img.cols();
  } else if (img.rows() != h || img.cols() != w) {
    std::ostringstream msg;
    msg << "image is " << img.rows() << "x" << img.cols() << ", expected " << h
        << "x" << w;
    fail(file, msg.str());
  }
  return Eigen::Map<Vec>(img.data(), img.size());  // column-major stacking
}

// Largest divisor of n that is <= sqrt(n); gives the synthetic image height.
Index balanced_height(Index n) {
  Index best = 1;
  for (Index h = 1; h * h <= n; ++h)
    if (n % h == 0) best = h;
  return best;
}

}  // namespace

const ClassRange& Gallery::range_of(int class_id) const {
  for (const ClassRange& r : class_ranges)
    if (r.class_id == class_id) return r;
  throw std::invalid_argument("unknown class id " + std::to_string(class_id));
}

Mat load_image(const fs::path& file) {
  std::string ext = file.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return load_pgm(file);
  if (ext == ".png") return load_png_gray(file);
  fail(file, "unsupported image extension (want .pgm or .png)");
}

void write_pgm(const fs::path& file, const Mat& img) {
  std::ofstream out(file, std::ios::binary);
  if (!out) fail(file, "cannot open for writing");
  out << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(img.cols()));
  for (Index r = 0; r < img.rows(); ++r) {
    for (Index c = 0; c < img.cols(); ++c)
      row[static_cast<std::size_t>(c)] = quantize(img(r, c));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) fail(file, "write failed");
}

void write_png(const fs::path& file, const Mat& img) {
  PngWriteCloser ctx;
  ctx.fp = std::fopen(file.string().c_str(), "wb");
  if (!ctx.fp) fail(file, "cannot open for writing");
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) fail(file, "libpng init failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) fail(file, "libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) fail(file, "libpng encode error");
  png_init_io(ctx.png, ctx.fp);
  png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(img.cols()),
               static_cast<png_uint_32>(img.rows()), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  std::vector<unsigned char> row(static_cast<std::size_t>(img.cols()));
  for (Index r = 0; r < img.rows(); ++r) {
    for (Index c = 0; c < img.cols(); ++c)
      row[static_cast<std::size_t>(c)] = quantize(img(r, c));
    png_write_row(ctx.png, row.data());
  }
  png_write_end(ctx.png, nullptr);
}

Mat bilinear_resize(const Mat& img, Index out_h, Index out_w) {
  if (out_h <= 0 || out_w <= 0)
    throw std::invalid_argument("bilinear_resize: non-positive output size");
  if (img.rows() == out_h && img.cols() == out_w) return img;
  Mat out(out_h, out_w);
  const double sr = static_cast<double>(img.rows()) / static_cast<double>(out_h);
  const double sc = static_cast<double>(img.cols()) / static_cast<double>(out_w);
  for (Index r = 0; r < out_h; ++r) {
    // half-pixel-center convention: dst center maps to src coordinate
    const double fr = (r + 0.5) * sr - 0.5;
    const Index r0 = std::clamp<Index>(static_cast<Index>(std::floor(fr)), 0,
                                       img.rows() - 1);
    const Index r1 = std::min<Index>(r0 + 1, img.rows() - 1);
    const double wr = std::clamp(fr - static_cast<double>(r0), 0.0, 1.0);
    for (Index c = 0; c < out_w; ++c) {
      const double fc = (c + 0.5) * sc - 0.5;
      const Index c0 = std::clamp<Index>(static_cast<Index>(std::floor(fc)), 0,
                                         img.cols() - 1);
      const Index c1 = std::min<Index>(c0 + 1, img.cols() - 1);
      const double wc = std::clamp(fc - static_cast<double>(c0), 0.0, 1.0);
      out(r, c) = (1.0 - wr) * ((1.0 - wc) * img(r0, c0) + wc * img(r0, c1)) +
                  wr * ((1.0 - wc) * img(r1, c0) + wc * img(r1, c1));
    }
  }
  return out;
}

Gallery load_gallery(const fs::path& root,
                     std::optional<std::pair<Index, Index>> resize_to) {
  const std::vector<fs::path> dirs = sorted_subdirs(root);
  if (dirs.empty()) fail(root, "no class directories");

  Gallery g;
  Index h = 0, w = 0;
  std::vector<Vec> columns;
  for (const fs::path& dir : dirs) {
    const std::vector<fs::path> files = sorted_images(dir);
    if (files.empty()) fail(dir, "empty class directory");
    ClassRange range;
    range.class_id = static_cast<int>(g.class_ranges.size());
    range.name = dir.filename().string();
    range.start = static_cast<Index>(columns.size());
    range.count = static_cast<Index>(files.size());
    for (const fs::path& file : files) {
      Vec col = load_column(file, resize_to, h, w);
      const double norm = col.norm();
      if (norm == 0.0) fail(file, "zero-norm column");
      columns.push_back(col / norm);
    }
    g.class_ranges.push_back(std::move(range));
  }

  g.height = h;
  g.width = w;
  g.a.resize(h * w, static_cast<Index>(columns.size()));
  for (Index j = 0; j < g.a.cols(); ++j)
    g.a.col(j) = columns[static_cast<std::size_t>(j)];
  return g;
}

TestSet load_test_set(const fs::path& root, const Gallery& g,
                      std::optional<std::pair<Index, Index>> resize_to) {
  const std::vector<fs::path> dirs = sorted_subdirs(root);
  if (dirs.empty()) fail(root, "no class directories");

  TestSet ts;
  Index h = g.height, w = g.width;
  std::vector<Vec> columns;
  for (const fs::path& dir : dirs) {
    const std::string name = dir.filename().string();
    const auto it =
        std::find_if(g.class_ranges.begin(), g.class_ranges.end(),
                     [&](const ClassRange& r) { return r.name == name; });
    if (it == g.class_ranges.end()) fail(dir, "class not present in gallery");
    for (const fs::path& file : sorted_images(dir)) {
      columns.push_back(load_column(file, resize_to, h, w));
      ts.labels.push_back(it->class_id);
    }
  }
  if (columns.empty()) fail(root, "no test images");
  ts.y.resize(h * w, static_cast<Index>(columns.size()));
  for (Index j = 0; j < ts.y.cols(); ++j)
    ts.y.col(j) = columns[static_cast<std::size_t>(j)];
  return ts;
}

std::pair<Gallery, TestSet> synth_gallery(const SynthSpec& spec) {
  if (spec.n_classes <= 0 || spec.subspace_dim <= 0 ||
      spec.images_per_class <= 0 || spec.ambient_dim <= 0 ||
      spec.tests_per_class < 0 || spec.noise_sigma < 0.0)
    throw std::invalid_argument("synth_gallery: non-positive spec field");
  if (spec.subspace_dim > spec.images_per_class ||
      spec.images_per_class > spec.ambient_dim)
    throw std::invalid_argument(
        "synth_gallery: need subspace_dim <= images_per_class <= ambient_dim");
  if (spec.class_overlap < 0.0 || spec.class_overlap >= 1.0)
    throw std::invalid_argument("synth_gallery: class_overlap must be in [0,1)");

  const Index m = spec.ambient_dim;
  const Index d = spec.subspace_dim;
  Gallery g;
  g.height = balanced_height(m);
  g.width = m / g.height;
  g.a.resize(m, static_cast<Index>(spec.n_classes) * spec.images_per_class);

  TestSet ts;
  ts.y.resize(m, static_cast<Index>(spec.n_classes) * spec.tests_per_class);

  // One shared Gaussian draw mixed into every class basis when overlap > 0.
  Mat shared;
  if (spec.class_overlap > 0.0) {
    Rng shared_rng(Rng::mix({spec.seed, 5}));
    shared = std::sqrt(spec.class_overlap) * gaussian_mat(m, d, shared_rng);
  }

  for (int c = 0; c < spec.n_classes; ++c) {
    const auto uc = static_cast<std::uint64_t>(c);
    Rng basis_rng(Rng::mix({spec.seed, 1, uc}));
    Rng coef_rng(Rng::mix({spec.seed, 2, uc}));
    Rng noise_rng(Rng::mix({spec.seed, 3, uc}));
    Rng test_rng(Rng::mix({spec.seed, 4, uc}));

    Mat gauss = gaussian_mat(m, d, basis_rng);
    if (spec.class_overlap > 0.0)
      gauss = shared + std::sqrt(1.0 - spec.class_overlap) * gauss;
    const Mat basis =
        Eigen::HouseholderQR<Mat>(gauss).householderQ() * Mat::Identity(m, d);

    ClassRange range;
    range.class_id = c;
    range.name = std::to_string(c);
    range.start = static_cast<Index>(c) * spec.images_per_class;
    range.count = spec.images_per_class;
    for (int j = 0; j < spec.images_per_class; ++j) {
      Vec col = basis * gaussian_mat(d, 1, coef_rng);
      if (spec.noise_sigma > 0.0)
        col += spec.noise_sigma * gaussian_mat(m, 1, noise_rng);
      const double norm = col.norm();
      if (norm == 0.0)
        throw std::runtime_error("synth_gallery: zero-norm column");
      g.a.col(range.start + j) = col / norm;
    }
    g.class_ranges.push_back(std::move(range));

    for (int j = 0; j < spec.tests_per_class; ++j) {
      Vec col = basis * gaussian_mat(d, 1, test_rng);
      if (spec.noise_sigma > 0.0)
        col += spec.noise_sigma * gaussian_mat(m, 1, test_rng);
      ts.y.col(static_cast<Index>(c) * spec.tests_per_class + j) = col;
      ts.labels.push_back(c);
    }
  }
  return {std::move(g), std::move(ts)};
}

void write_gallery(const fs::path& root, const Gallery& g,
                   const TestSet& tests) {
  auto write_split = [&](const fs::path& base, const Mat& cols,
                         auto class_of_col) {
    for (Index j = 0; j < cols.cols(); ++j) {
      const ClassRange& range = g.range_of(class_of_col(j));
      const fs::path dir = base / range.name;
      fs::create_directories(dir);
      Vec col = cols.col(j);
      const double lo = col.minCoeff(), hi = col.maxCoeff();
      if (hi > lo) col = (col.array() - lo) / (hi - lo);
      Eigen::Map<const Mat> img(col.data(), g.height, g.width);
      char name[16];
      std::snprintf(name, sizeof(name), "%04d.pgm", static_cast<int>(j));
      write_pgm(dir / name, img);
    }
  };
  write_split(root / "train", g.a, [&](Index j) {
    for (const ClassRange& r : g.class_ranges)
      if (j >= r.start && j < r.start + r.count) return r.class_id;
    throw std::logic_error("column outside class ranges");
  });
  write_split(root / "test", tests.y, [&](Index j) {
    return tests.labels[static_cast<std::size_t>(j)];
  });
}

OcclusionBasis build_occlusion_basis(Index height, Index width, Index grid_rows,
                                     Index grid_cols) {
  if (grid_rows <= 0 || grid_cols <= 0)
    throw std::invalid_argument("build_occlusion_basis: zero grid dims");
  if (grid_rows > height || grid_cols > width)
    throw std::invalid_argument("build_occlusion_basis: grid exceeds image");

  OcclusionBasis basis;
  basis.grid_rows = grid_rows;
  basis.grid_cols = grid_cols;
  basis.w = Mat::Zero(height * width, grid_rows * grid_cols);
  const Index th = height / grid_rows, tw = width / grid_cols;
  for (Index i = 0; i < grid_rows; ++i) {
    const Index r0 = i * th;
    const Index r1 = (i + 1 == grid_rows) ? height : r0 + th;  // absorb remainder
    for (Index j = 0; j < grid_cols; ++j) {
      const Index c0 = j * tw;
      const Index c1 = (j + 1 == grid_cols) ? width : c0 + tw;
      const Index col = i * grid_cols + j;
      const double value =
          1.0 / std::sqrt(static_cast<double>((r1 - r0) * (c1 - c0)));
      for (Index c = c0; c < c1; ++c)
        for (Index r = r0; r < r1; ++r) basis.w(c * height + r, col) = value;
    }
  }
  return basis;
}

Vec class_subvector(const Gallery& g, const Vec& x, int class_id) {
  if (x.size() != g.a.cols())
    throw std::invalid_argument("class_subvector: coefficient length mismatch");
  const ClassRange& range = g.range_of(class_id);
  return x.segment(range.start, range.count);
}

}  // namespace srcbench
