#include "cbo/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace cbo::nn {

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error("load_idx: truncated header reading " + what);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

// Normalize each column of a batch-major activation block to zero mean, unit
// variance (population statistics, epsilon guard, no affine parameters).
// Layout: values[b * width + j]; the "column" j runs over features. For conv
// activations the caller folds the spatial extent into the batch axis so the
// normalization is per channel.
void batchnorm_columns(std::vector<double>& values, long batch, long width) {
  for (long j = 0; j < width; ++j) {
    double mean = 0.0;
    for (long b = 0; b < batch; ++b) mean += values[static_cast<std::size_t>(b) * width + j];
    mean /= static_cast<double>(batch);
    double var = 0.0;
    for (long b = 0; b < batch; ++b) {
      const double diff = values[static_cast<std::size_t>(b) * width + j] - mean;
      var += diff * diff;
    }
    var /= static_cast<double>(batch);
    const double inv = 1.0 / std::sqrt(var + kBatchNormEps);
    for (long b = 0; b < batch; ++b) {
      auto& x = values[static_cast<std::size_t>(b) * width + j];
      x = (x - mean) * inv;
    }
  }
}

void softmax_rows(Matrix& probs) {
  for (long i = 0; i < probs.rows; ++i) {
    double* row = probs.row(i);
    double m = row[0];
    for (long j = 1; j < probs.cols; ++j) m = std::max(m, row[j]);
    double sum = 0.0;
    for (long j = 0; j < probs.cols; ++j) {
      row[j] = std::exp(row[j] - m);
      sum += row[j];
    }
    for (long j = 0; j < probs.cols; ++j) row[j] /= sum;
  }
}

// Normalize per channel over (batch, h, w): the channel axis is folded out of
// the per-image layout maps[b][ch][y][x] stored as b-major contiguous blocks.
void batchnorm_channels(std::vector<double>& maps, long batch, int channels, int side) {
  const long plane = static_cast<long>(side) * side;
  const long per_image = channels * plane;
  for (int c = 0; c < channels; ++c) {
    double mean = 0.0;
    for (long b = 0; b < batch; ++b) {
      const double* p = maps.data() + b * per_image + c * plane;
      for (long i = 0; i < plane; ++i) mean += p[i];
    }
    mean /= static_cast<double>(batch * plane);
    double var = 0.0;
    for (long b = 0; b < batch; ++b) {
      const double* p = maps.data() + b * per_image + c * plane;
      for (long i = 0; i < plane; ++i) {
        const double diff = p[i] - mean;
        var += diff * diff;
      }
    }
    var /= static_cast<double>(batch * plane);
    const double inv = 1.0 / std::sqrt(var + kBatchNormEps);
    for (long b = 0; b < batch; ++b) {
      double* p = maps.data() + b * per_image + c * plane;
      for (long i = 0; i < plane; ++i) p[i] = (p[i] - mean) * inv;
    }
  }
}

void maxpool2(const double* in, int in_side, double* out) {
  const int out_side = in_side / 2;
  for (int y = 0; y < out_side; ++y) {
    for (int x = 0; x < out_side; ++x) {
      const double* base = in + (2 * y) * in_side + 2 * x;
      out[y * out_side + x] =
          std::max(std::max(base[0], base[1]), std::max(base[in_side], base[in_side + 1]));
    }
  }
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::optional<long> limit) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("load_idx: cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("load_idx: cannot open " + labels_path);

  if (read_be32(img, "image magic") != 2051)
    throw std::runtime_error("load_idx: bad magic in " + images_path);
  const long n_img = read_be32(img, "image count");
  const long rows = read_be32(img, "rows");
  const long cols = read_be32(img, "cols");

  if (read_be32(lab, "label magic") != 2049)
    throw std::runtime_error("load_idx: bad magic in " + labels_path);
  const long n_lab = read_be32(lab, "label count");
  if (n_img != n_lab) throw std::runtime_error("load_idx: image/label count mismatch");

  long keep = n_img;
  if (limit) keep = std::min(keep, std::max<long>(0, *limit));

  Dataset data;
  data.count = keep;
  data.rows = static_cast<int>(rows);
  data.cols = static_cast<int>(cols);
  const std::size_t n_px = static_cast<std::size_t>(keep) * rows * cols;
  std::vector<unsigned char> raw(n_px);
  if (!img.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n_px)))
    throw std::runtime_error("load_idx: truncated image payload in " + images_path);
  data.pixels.resize(n_px);
  for (std::size_t i = 0; i < n_px; ++i) data.pixels[i] = static_cast<float>(raw[i]) / 255.0f;

  data.labels.resize(static_cast<std::size_t>(keep));
  if (keep > 0 &&
      !lab.read(reinterpret_cast<char*>(data.labels.data()), static_cast<std::streamsize>(keep)))
    throw std::runtime_error("load_idx: truncated label payload in " + labels_path);
  for (auto l : data.labels)
    if (l > 9) throw std::runtime_error("load_idx: label outside 0..9");
  return data;
}

void forward_shallow(std::span<const double> theta, const Dataset& data, std::span<const int> idx,
                     Matrix& probs) {
  if (static_cast<long>(theta.size()) != ShallowLayout::total)
    throw std::invalid_argument("forward_shallow: theta length must be 7850");
  if (idx.empty()) throw std::invalid_argument("forward_shallow: empty batch");
  if (data.rows * data.cols != kImagePixels)
    throw std::invalid_argument("forward_shallow: dataset images are not 28x28");

  const long batch = static_cast<long>(idx.size());
  const double* W = theta.data() + ShallowLayout::dense_w;
  const double* bias = theta.data() + ShallowLayout::dense_b;

  std::vector<double> act(static_cast<std::size_t>(batch) * kClasses);
  for (long b = 0; b < batch; ++b) {
    const float* img = data.image(idx[static_cast<std::size_t>(b)]);
    for (int j = 0; j < kClasses; ++j) {
      const double* wj = W + static_cast<std::size_t>(j) * kImagePixels;
      double acc = bias[j];
      for (int k = 0; k < kImagePixels; ++k) acc += wj[k] * static_cast<double>(img[k]);
      act[static_cast<std::size_t>(b) * kClasses + j] = acc > 0.0 ? acc : 0.0;
    }
  }
  batchnorm_columns(act, batch, kClasses);

  probs = Matrix(batch, kClasses);
  std::memcpy(probs.data.data(), act.data(), act.size() * sizeof(double));
  softmax_rows(probs);
}

void forward_lenet(std::span<const double> theta, const Dataset& data, std::span<const int> idx,
                   Matrix& probs) {
  using L = Lenet1Layout;
  if (static_cast<long>(theta.size()) != L::total)
    throw std::invalid_argument("forward_lenet: theta length must be 2112");
  if (idx.empty()) throw std::invalid_argument("forward_lenet: empty batch");
  if (data.rows != kImageSide || data.cols != kImageSide)
    throw std::invalid_argument("forward_lenet: dataset images are not 28x28");

  const long batch = static_cast<long>(idx.size());
  const double* c1w = theta.data() + L::conv1_w;
  const double* c1b = theta.data() + L::conv1_b;
  const double* c2w = theta.data() + L::conv2_w;
  const double* c2b = theta.data() + L::conv2_b;
  const double* dw = theta.data() + L::dense_w;
  const double* db = theta.data() + L::dense_b;

  // Stage 1: conv1 + relu over the whole batch, then channel batchnorm, pool.
  const long plane1 = L::kSide1 * L::kSide1;
  std::vector<double> a1(static_cast<std::size_t>(batch) * L::kConv1Maps * plane1);
  for (long b = 0; b < batch; ++b) {
    const float* img = data.image(idx[static_cast<std::size_t>(b)]);
    for (int c = 0; c < L::kConv1Maps; ++c) {
      const double* kern = c1w + static_cast<std::size_t>(c) * L::kKernel * L::kKernel;
      double* out = a1.data() + (b * L::kConv1Maps + c) * plane1;
      for (int y = 0; y < L::kSide1; ++y) {
        for (int x = 0; x < L::kSide1; ++x) {
          double acc = c1b[c];
          for (int u = 0; u < L::kKernel; ++u) {
            const float* in_row = img + (y + u) * kImageSide + x;
            const double* k_row = kern + u * L::kKernel;
            for (int v = 0; v < L::kKernel; ++v)
              acc += k_row[v] * static_cast<double>(in_row[v]);
          }
          out[y * L::kSide1 + x] = acc > 0.0 ? acc : 0.0;
        }
      }
    }
  }
  batchnorm_channels(a1, batch, L::kConv1Maps, L::kSide1);

  const long pool_plane1 = L::kPool1 * L::kPool1;
  std::vector<double> p1(static_cast<std::size_t>(batch) * L::kConv1Maps * pool_plane1);
  for (long b = 0; b < batch; ++b)
    for (int c = 0; c < L::kConv1Maps; ++c)
      maxpool2(a1.data() + (b * L::kConv1Maps + c) * plane1, L::kSide1,
               p1.data() + (b * L::kConv1Maps + c) * pool_plane1);

  // Stage 2: each conv2 kernel applied to every channel separately -> 12 maps.
  const long plane2 = L::kSide2 * L::kSide2;
  std::vector<double> a2(static_cast<std::size_t>(batch) * L::kConv2Maps * plane2);
  for (long b = 0; b < batch; ++b) {
    for (int j = 0; j < L::kConv2Kernels; ++j) {
      const double* kern = c2w + static_cast<std::size_t>(j) * L::kKernel * L::kKernel;
      for (int c = 0; c < L::kConv1Maps; ++c) {
        const double* in = p1.data() + (b * L::kConv1Maps + c) * pool_plane1;
        double* out = a2.data() + (b * L::kConv2Maps + j * L::kConv1Maps + c) * plane2;
        for (int y = 0; y < L::kSide2; ++y) {
          for (int x = 0; x < L::kSide2; ++x) {
            double acc = c2b[j];
            for (int u = 0; u < L::kKernel; ++u) {
              const double* in_row = in + (y + u) * L::kPool1 + x;
              const double* k_row = kern + u * L::kKernel;
              for (int v = 0; v < L::kKernel; ++v) acc += k_row[v] * in_row[v];
            }
            out[y * L::kSide2 + x] = acc > 0.0 ? acc : 0.0;
          }
        }
      }
    }
  }
  batchnorm_channels(a2, batch, L::kConv2Maps, L::kSide2);

  const long pool_plane2 = L::kPool2 * L::kPool2;  // flatten sees 12 x 4 x 4
  std::vector<double> flat(static_cast<std::size_t>(batch) * L::kFlat);
  for (long b = 0; b < batch; ++b)
    for (int c = 0; c < L::kConv2Maps; ++c)
      maxpool2(a2.data() + (b * L::kConv2Maps + c) * plane2, L::kSide2,
               flat.data() + b * L::kFlat + c * pool_plane2);

  std::vector<double> act(static_cast<std::size_t>(batch) * kClasses);
  for (long b = 0; b < batch; ++b) {
    const double* f = flat.data() + b * L::kFlat;
    for (int j = 0; j < kClasses; ++j) {
      const double* wj = dw + static_cast<std::size_t>(j) * L::kFlat;
      double acc = db[j];
      for (int k = 0; k < L::kFlat; ++k) acc += wj[k] * f[k];
      act[static_cast<std::size_t>(b) * kClasses + j] = acc > 0.0 ? acc : 0.0;
    }
  }
  batchnorm_columns(act, batch, kClasses);

  probs = Matrix(batch, kClasses);
  std::memcpy(probs.data.data(), act.data(), act.size() * sizeof(double));
  softmax_rows(probs);
}

void forward(const NetworkSpec& net, std::span<const double> theta, const Dataset& data,
             std::span<const int> idx, Matrix& probs) {
  if (net.kind == NetKind::Shallow)
    forward_shallow(theta, data, idx, probs);
  else
    forward_lenet(theta, data, idx, probs);
}

double batch_loss(std::span<const double> theta, const NetworkSpec& net, const Dataset& data,
                  std::span<const int> idx) {
  Matrix probs;
  forward(net, theta, data, idx, probs);
  double loss = 0.0;
  for (long b = 0; b < probs.rows; ++b) {
    const int label = data.labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(b)])];
    if (label < 0 || label >= kClasses)
      throw std::invalid_argument("batch_loss: label outside 0..9");
    loss += -std::log(std::max(probs.at(b, label), kProbFloor));
  }
  return loss / static_cast<double>(probs.rows);
}

double accuracy(std::span<const double> theta, const NetworkSpec& net, const Dataset& data,
                std::span<const int> idx) {
  std::vector<int> all;
  if (idx.empty()) {
    all.resize(static_cast<std::size_t>(data.count));
    std::iota(all.begin(), all.end(), 0);
    idx = all;
  }
  Matrix probs;
  forward(net, theta, data, idx, probs);
  long correct = 0;
  for (long b = 0; b < probs.rows; ++b) {
    const double* row = probs.row(b);
    int best = 0;
    for (int j = 1; j < kClasses; ++j)
      if (row[j] > row[best]) best = j;  // ties keep the lowest class
    correct += (best == data.labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(b)])]);
  }
  return static_cast<double>(correct) / static_cast<double>(probs.rows);
}

Objective make_objective(const NetworkSpec& net, const Dataset& train) {
  Objective obj;
  obj.dim = net.param_count;
  obj.dataset_size = static_cast<std::size_t>(train.count);
  const Dataset* dataset = &train;
  obj.eval_batch = [net, dataset](std::span<const double> theta, std::span<const int> idx) {
    return batch_loss(theta, net, *dataset, idx);
  };
  obj.eval = [net, dataset](std::span<const double> theta) {
    std::vector<int> all(static_cast<std::size_t>(dataset->count));
    std::iota(all.begin(), all.end(), 0);
    return batch_loss(theta, net, *dataset, all);
  };
  return obj;
}

}  // namespace cbo::nn
