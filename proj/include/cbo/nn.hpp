#ifndef CBO_NN_HPP
#define CBO_NN_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbo/matrix.hpp"
#include "cbo/objectives.hpp"

// Forward-only classifiers trained by the particle dynamics (no gradients).
// Shallow: flatten 784 -> dense 10 -> relu -> batchnorm -> softmax.
// LeNet1:  conv 5x5 x4 (28->24) -> relu -> batchnorm -> maxpool 2x2 (->12)
//          -> conv 5x5 x3 per channel, 12 maps (->8) -> relu -> batchnorm
//          -> maxpool (->4) -> flatten 192 -> dense 10 -> relu -> batchnorm
//          -> softmax.
// Batchnorm uses current-batch statistics only (no affine parameters, no
// running averages); evaluation is therefore always batched.

namespace cbo::nn {

enum class NetKind { Shallow, LeNet1 };

inline constexpr int kImageSide = 28;
inline constexpr int kImagePixels = kImageSide * kImageSide;
inline constexpr int kClasses = 10;
inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kProbFloor = 1e-12;

// Parameter vector layout. Shallow: rows of W (10x784), then b (10).
// LeNet1: conv1 kernels (4x5x5) + 4 biases, conv2 kernels (3x5x5) + 3 biases,
// dense W (10x192) row-major, then b (10). Dense input is flattened as
// (channel, row, col) with channel index = kernel*4 + input channel.
struct Lenet1Layout {
  static constexpr int kKernel = 5;
  static constexpr int kConv1Maps = 4;
  static constexpr int kConv2Kernels = 3;
  static constexpr int kConv2Maps = kConv2Kernels * kConv1Maps;  // 12
  static constexpr int kSide1 = 24, kPool1 = 12, kSide2 = 8, kPool2 = 4;
  static constexpr int kFlat = kConv2Maps * kPool2 * kPool2;  // 192

  static constexpr long conv1_w = 0;
  static constexpr long conv1_b = conv1_w + kConv1Maps * kKernel * kKernel;
  static constexpr long conv2_w = conv1_b + kConv1Maps;
  static constexpr long conv2_b = conv2_w + kConv2Kernels * kKernel * kKernel;
  static constexpr long dense_w = conv2_b + kConv2Kernels;
  static constexpr long dense_b = dense_w + kClasses * kFlat;
  static constexpr long total = dense_b + kClasses;  // 2112
};

struct ShallowLayout {
  static constexpr long dense_w = 0;
  static constexpr long dense_b = dense_w + kClasses * kImagePixels;
  static constexpr long total = dense_b + kClasses;  // 7850
};

struct NetworkSpec {
  NetKind kind = NetKind::Shallow;
  long param_count = ShallowLayout::total;

  static NetworkSpec shallow() { return {NetKind::Shallow, ShallowLayout::total}; }
  static NetworkSpec lenet1() { return {NetKind::LeNet1, Lenet1Layout::total}; }

  // Shape of the LeNet1 tensor entering the flatten step: channels x h x w.
  std::array<int, 3> pre_flatten_shape() const {
    return {Lenet1Layout::kConv2Maps, Lenet1Layout::kPool2, Lenet1Layout::kPool2};
  }
};

struct Dataset {
  long count = 0;
  int rows = kImageSide;
  int cols = kImageSide;
  std::vector<float> pixels;  // count*rows*cols, row-major, scaled to [0,1]
  std::vector<std::uint8_t> labels;

  const float* image(long i) const {
    return pixels.data() + static_cast<std::size_t>(i) * rows * cols;
  }
};

// IDX pair loader: big-endian headers, image magic 2051, label magic 2049,
// pixels scaled by 1/255. Throws std::runtime_error on bad magic, count
// mismatch, or truncated payload. limit keeps only the first entries.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::optional<long> limit = std::nullopt);

// probs gets one probability row per batch entry (rows sum to 1).
void forward_shallow(std::span<const double> theta, const Dataset& data, std::span<const int> idx,
                     Matrix& probs);
void forward_lenet(std::span<const double> theta, const Dataset& data, std::span<const int> idx,
                   Matrix& probs);
void forward(const NetworkSpec& net, std::span<const double> theta, const Dataset& data,
             std::span<const int> idx, Matrix& probs);

// Mean categorical crossentropy -log p_true over the batch, probabilities
// floored at 1e-12.
double batch_loss(std::span<const double> theta, const NetworkSpec& net, const Dataset& data,
                  std::span<const int> idx);

// Fraction of correct argmax predictions; ties resolve to the lowest class.
// Empty idx means the whole dataset (evaluated as one batch).
double accuracy(std::span<const double> theta, const NetworkSpec& net, const Dataset& data,
                std::span<const int> idx = {});

// Mini-batch objective over the training set: eval_batch scores a parameter
// vector on the given sample indices. The dataset must outlive the objective.
Objective make_objective(const NetworkSpec& net, const Dataset& train);

}  // namespace cbo::nn

#endif
