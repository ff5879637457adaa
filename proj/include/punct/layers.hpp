#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "punct/tensor.hpp"

namespace punct {

using NamedParams = std::vector<std::pair<std::string, Parameter*>>;

/// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], row-major draw order.
MatrixX uniform_init(Index rows, Index cols, Index fan_in, std::mt19937_64& rng);

/// Update/reset-gate GRU cell:
///   z = sigmoid(W_z x + U_z h + b_z)
///   r = sigmoid(W_r x + U_r h + b_r)
///   h~ = tanh(W_h x + U_h (r .* h) + b_h)
///   h' = (1 - z) .* h + z .* h~
struct GruCellParams {
    Index input_dim = 0;
    Index hidden_dim = 0;
    Parameter W_z, W_r, W_h;  // hidden x input
    Parameter U_z, U_r, U_h;  // hidden x hidden
    Parameter b_z, b_r, b_h;  // hidden x 1

    static GruCellParams init(Index input_dim, Index hidden_dim, std::mt19937_64& rng);
    NamedParams parameters(const std::string& prefix);
};

struct BiGruParams {
    GruCellParams forward_cell;
    GruCellParams backward_cell;

    Index input_dim() const { return forward_cell.input_dim; }
    Index hidden_dim() const { return forward_cell.hidden_dim; }
    static BiGruParams init(Index input_dim, Index hidden_dim, std::mt19937_64& rng);
    NamedParams parameters(const std::string& prefix);
};

/// Location-based attention: score per position is a learned vector dotted
/// with that position's encoder output.
struct AttentionParams {
    Parameter score_vector;  // (2*hidden) x 1

    static AttentionParams init(Index dim, std::mt19937_64& rng);
    NamedParams parameters(const std::string& prefix);
};

struct LinearParams {
    Parameter weight;  // out x in
    Parameter bias;    // out x 1

    Index in_dim() const { return weight.cols(); }
    Index out_dim() const { return weight.rows(); }
    static LinearParams init(Index out, Index in, std::mt19937_64& rng);
    NamedParams parameters(const std::string& prefix);
};

Tensor gru_cell_step(Tape& t, GruCellParams& cell, Tensor x_t, Tensor h_prev);

/// Per-position outputs concat(fwd_h_m, bwd_h_m). mask[i] is true for real
/// positions; false entries must form a suffix (right padding) and produce
/// zero vectors.
std::vector<Tensor> bigru_forward(Tape& t, BiGruParams& params,
                                  std::span<const Tensor> seq,
                                  const std::vector<bool>& mask);

/// Softmax-weighted average of the unmasked positions. Masked positions get
/// weight exactly zero (they are excluded from the softmax).
Tensor attention_pool(Tape& t, AttentionParams& attn, std::span<const Tensor> H,
                      const std::vector<bool>& mask);

Tensor linear(Tape& t, LinearParams& l, Tensor x);

}  // namespace punct
