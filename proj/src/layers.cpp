#include "punct/layers.hpp"

#include <cmath>

namespace punct {

MatrixX uniform_init(Index rows, Index cols, Index fan_in, std::mt19937_64& rng) {
    Scalar bound = 1.0 / std::sqrt(static_cast<Scalar>(fan_in));
    std::uniform_real_distribution<Scalar> dist(-bound, bound);
    MatrixX m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
    return m;
}

GruCellParams GruCellParams::init(Index input_dim, Index hidden_dim, std::mt19937_64& rng) {
    GruCellParams p;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    p.W_z = Parameter(uniform_init(hidden_dim, input_dim, input_dim, rng));
    p.W_r = Parameter(uniform_init(hidden_dim, input_dim, input_dim, rng));
    p.W_h = Parameter(uniform_init(hidden_dim, input_dim, input_dim, rng));
    p.U_z = Parameter(uniform_init(hidden_dim, hidden_dim, hidden_dim, rng));
    p.U_r = Parameter(uniform_init(hidden_dim, hidden_dim, hidden_dim, rng));
    p.U_h = Parameter(uniform_init(hidden_dim, hidden_dim, hidden_dim, rng));
    p.b_z = Parameter(MatrixX::Zero(hidden_dim, 1));
    p.b_r = Parameter(MatrixX::Zero(hidden_dim, 1));
    p.b_h = Parameter(MatrixX::Zero(hidden_dim, 1));
    return p;
}

NamedParams GruCellParams::parameters(const std::string& prefix) {
    return {{prefix + ".W_z", &W_z}, {prefix + ".W_r", &W_r}, {prefix + ".W_h", &W_h},
            {prefix + ".U_z", &U_z}, {prefix + ".U_r", &U_r}, {prefix + ".U_h", &U_h},
            {prefix + ".b_z", &b_z}, {prefix + ".b_r", &b_r}, {prefix + ".b_h", &b_h}};
}

BiGruParams BiGruParams::init(Index input_dim, Index hidden_dim, std::mt19937_64& rng) {
    BiGruParams p;
    p.forward_cell = GruCellParams::init(input_dim, hidden_dim, rng);
    p.backward_cell = GruCellParams::init(input_dim, hidden_dim, rng);
    return p;
}

NamedParams BiGruParams::parameters(const std::string& prefix) {
    NamedParams out = forward_cell.parameters(prefix + ".fwd");
    NamedParams bwd = backward_cell.parameters(prefix + ".bwd");
    out.insert(out.end(), bwd.begin(), bwd.end());
    return out;
}

AttentionParams AttentionParams::init(Index dim, std::mt19937_64& rng) {
    AttentionParams p;
    p.score_vector = Parameter(uniform_init(dim, 1, dim, rng));
    return p;
}

NamedParams AttentionParams::parameters(const std::string& prefix) {
    return {{prefix + ".score", &score_vector}};
}

LinearParams LinearParams::init(Index out, Index in, std::mt19937_64& rng) {
    LinearParams p;
    p.weight = Parameter(uniform_init(out, in, in, rng));
    p.bias = Parameter(MatrixX::Zero(out, 1));
    return p;
}

NamedParams LinearParams::parameters(const std::string& prefix) {
    return {{prefix + ".weight", &weight}, {prefix + ".bias", &bias}};
}

Tensor gru_cell_step(Tape& t, GruCellParams& cell, Tensor x_t, Tensor h_prev) {
    if (x_t.rows() != cell.input_dim || !x_t.is_vector())
        throw Error("gru_cell_step: input shape " + shape_str(x_t.rows(), x_t.cols()) +
                    " does not match input_dim " + std::to_string(cell.input_dim));
    if (h_prev.rows() != cell.hidden_dim || !h_prev.is_vector())
        throw Error("gru_cell_step: state shape " + shape_str(h_prev.rows(), h_prev.cols()) +
                    " does not match hidden_dim " + std::to_string(cell.hidden_dim));

    Tensor z = sigmoid(add(
        add(matmul(t.param(cell.W_z), x_t), matmul(t.param(cell.U_z), h_prev)),
        t.param(cell.b_z)));
    Tensor r = sigmoid(add(
        add(matmul(t.param(cell.W_r), x_t), matmul(t.param(cell.U_r), h_prev)),
        t.param(cell.b_r)));
    Tensor h_cand = tanh(add(
        add(matmul(t.param(cell.W_h), x_t), matmul(t.param(cell.U_h), mul(r, h_prev))),
        t.param(cell.b_h)));
    Tensor one = t.constant(MatrixX::Ones(cell.hidden_dim, 1));
    return add(mul(sub(one, z), h_prev), mul(z, h_cand));
}

namespace {

// valid positions must be a prefix; returns their count
std::size_t checked_valid_count(std::size_t len, const std::vector<bool>& mask,
                                const char* op) {
    if (mask.size() != len)
        throw Error(std::string(op) + ": mask length " + std::to_string(mask.size()) +
                    " does not match sequence length " + std::to_string(len));
    std::size_t valid = 0;
    bool seen_pad = false;
    for (bool real : mask) {
        if (real) {
            if (seen_pad)
                throw Error(std::string(op) + ": masked positions must form a suffix");
            ++valid;
        } else {
            seen_pad = true;
        }
    }
    return valid;
}

}  // namespace

std::vector<Tensor> bigru_forward(Tape& t, BiGruParams& params,
                                  std::span<const Tensor> seq,
                                  const std::vector<bool>& mask) {
    if (seq.empty()) throw Error("bigru_forward: empty sequence");
    std::size_t valid = checked_valid_count(seq.size(), mask, "bigru_forward");
    if (valid == 0) throw Error("bigru_forward: no unmasked positions");

    Index h = params.hidden_dim();
    std::vector<Tensor> fwd(valid), bwd(valid);
    Tensor state = t.zeros(h);
    for (std::size_t i = 0; i < valid; ++i) {
        state = gru_cell_step(t, params.forward_cell, seq[i], state);
        fwd[i] = state;
    }
    state = t.zeros(h);
    for (std::size_t i = valid; i-- > 0;) {
        state = gru_cell_step(t, params.backward_cell, seq[i], state);
        bwd[i] = state;
    }

    std::vector<Tensor> out(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i)
        out[i] = i < valid ? concat(fwd[i], bwd[i]) : t.zeros(2 * h);
    return out;
}

Tensor attention_pool(Tape& t, AttentionParams& attn, std::span<const Tensor> H,
                      const std::vector<bool>& mask) {
    if (H.empty()) throw Error("attention_pool: empty input");
    checked_valid_count(H.size(), mask, "attention_pool");

    Tensor score = t.param(attn.score_vector);
    std::vector<Tensor> kept;
    std::vector<Tensor> scores;
    for (std::size_t i = 0; i < H.size(); ++i) {
        if (!mask[i]) continue;
        kept.push_back(H[i]);
        scores.push_back(dot(score, H[i]));
    }
    if (kept.empty()) throw Error("attention_pool: all positions masked");
    Tensor weights = softmax(concat(scores));
    return weighted_sum(kept, weights);
}

Tensor linear(Tape& t, LinearParams& l, Tensor x) {
    return add(matmul(t.param(l.weight), x), t.param(l.bias));
}

}  // namespace punct
