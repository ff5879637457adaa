#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

#include "punct/types.hpp"

namespace punct {

class Tape;

/// Trainable value plus its accumulated gradient. Gradients add up across
/// backward passes until zero_grad() is called.
struct Parameter {
    MatrixX value;
    MatrixX grad;
    bool trainable = true;

    Parameter() = default;
    explicit Parameter(MatrixX v)
        : value(std::move(v)), grad(MatrixX::Zero(value.rows(), value.cols())) {}

    Parameter(const Parameter&) = delete;
    Parameter& operator=(const Parameter&) = delete;
    Parameter(Parameter&&) = default;
    Parameter& operator=(Parameter&&) = default;

    Index rows() const { return value.rows(); }
    Index cols() const { return value.cols(); }
    Index size() const { return value.size(); }
    void zero_grad() { grad.setZero(); }
};

/// Handle to a value recorded on a Tape. Cheap to copy; valid until the tape
/// is cleared or destroyed. Vectors are stored as n x 1.
struct Tensor {
    Tape* tape = nullptr;
    int node = -1;

    const MatrixX& value() const;
    Index rows() const { return value().rows(); }
    Index cols() const { return value().cols(); }
    Index size() const { return value().size(); }
    bool is_vector() const { return value().cols() == 1; }
    Scalar scalar() const;
};

enum class UnaryKind { Tanh, Sigmoid };

/// Maps a parameter to the buffer its gradient should be accumulated into.
/// Returning nullptr skips the parameter.
using GradSink = std::function<MatrixX*(Parameter&)>;

/// Records forward operations and replays them in reverse to accumulate
/// gradients. One tape per forward pass; clear() between batches.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Tensor constant(MatrixX v);
    Tensor vector(std::initializer_list<Scalar> xs);
    Tensor zeros(Index rows, Index cols = 1);

    /// Leaf node backed by a parameter; memoized so repeated use within one
    /// pass shares a single node (gradients from all uses accumulate).
    Tensor param(Parameter& p);

    /// Accumulates d(loss)/d(param) into each parameter's grad member.
    /// loss must be scalar (1x1). May be called repeatedly on one tape;
    /// each call is an independent pass.
    void backward(Tensor loss);
    void backward(Tensor loss, const GradSink& sink);

    void clear();
    std::size_t size() const { return nodes_.size(); }

    // internal representation; used by the free op functions below
    enum class Op : std::uint8_t {
        Leaf,
        MatMul,
        Add,
        Sub,
        Mul,
        Tanh,
        Sigmoid,
        Log,
        Softmax,
        Concat,
        Slice,
        Row,
        Sum,
        Dot,
        Element,
        Scale,
        ScaleConst,
        WeightedSum,
    };

    struct Node {
        Op op = Op::Leaf;
        MatrixX val;                    // owned result (unused for param leaves)
        const MatrixX* ext = nullptr;   // param leaves alias Parameter::value
        MatrixX grad;                   // allocated lazily during backward
        std::vector<int> parents;
        Parameter* param = nullptr;
        Index a0 = 0, a1 = 0;           // row / slice offset+len / element index
        Scalar c = 0;                   // ScaleConst factor

        const MatrixX& value() const { return ext ? *ext : val; }
    };

    int emit(Node n);
    const Node& at(int i) const { return nodes_[i]; }

private:
    MatrixX& grad_of(int i);

    std::deque<Node> nodes_;  // deque: emit() must not invalidate value() references
    std::unordered_map<Parameter*, int> param_nodes_;
};

inline const MatrixX& Tensor::value() const { return tape->at(node).value(); }

// -- recorded operations ----------------------------------------------------

Tensor matmul(Tensor a, Tensor b);
Tensor add(Tensor a, Tensor b);
Tensor sub(Tensor a, Tensor b);
Tensor mul(Tensor a, Tensor b);  // elementwise
Tensor unary(UnaryKind kind, Tensor x);
Tensor tanh(Tensor x);
Tensor sigmoid(Tensor x);
Tensor log(Tensor x);
Tensor softmax(Tensor x);  // vector, max-subtracted for stability
Tensor concat(std::span<const Tensor> parts);
Tensor concat(Tensor a, Tensor b);
Tensor slice(Tensor x, Index offset, Index len);
Tensor row(Tensor m, Index i);  // matrix row as a column vector
Tensor sum(Tensor x);           // sum of all entries, scalar
Tensor dot(Tensor a, Tensor b);
Tensor element(Tensor x, Index i);
Tensor scale(Tensor x, Tensor s);   // multiply by a scalar node
Tensor scale(Tensor x, Scalar c);
Tensor weighted_sum(std::span<const Tensor> items, Tensor weights);

/// Max over all parameter coordinates of the relative disagreement between
/// the recorded gradient and a central finite difference of f.
/// f builds and returns a scalar loss on the tape it is given.
Scalar grad_check(const std::function<Tensor(Tape&)>& f,
                  std::span<Parameter* const> params, Scalar epsilon);

}  // namespace punct
