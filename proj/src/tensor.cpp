#include "punct/tensor.hpp"

#include <cmath>

namespace punct {

namespace {

void require_same_tape(Tensor a, Tensor b, const char* op) {
    if (a.tape == nullptr || a.tape != b.tape)
        throw Error(std::string(op) + ": operands recorded on different tapes");
}

void require_vector(Tensor x, const char* op) {
    if (!x.is_vector())
        throw Error(std::string(op) + ": expected a vector, got " +
                    shape_str(x.rows(), x.cols()));
}

}  // namespace

int Tape::emit(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

MatrixX& Tape::grad_of(int i) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) n.grad = MatrixX::Zero(n.value().rows(), n.value().cols());
    return n.grad;
}

Tensor Tape::constant(MatrixX v) {
    Node n;
    n.op = Op::Leaf;
    n.val = std::move(v);
    return Tensor{this, emit(std::move(n))};
}

Tensor Tape::vector(std::initializer_list<Scalar> xs) {
    MatrixX v(static_cast<Index>(xs.size()), 1);
    Index i = 0;
    for (Scalar x : xs) v(i++, 0) = x;
    return constant(std::move(v));
}

Tensor Tape::zeros(Index rows, Index cols) { return constant(MatrixX::Zero(rows, cols)); }

Tensor Tape::param(Parameter& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return Tensor{this, it->second};
    Node n;
    n.op = Op::Leaf;
    n.ext = &p.value;
    n.param = &p;
    int idx = emit(std::move(n));
    param_nodes_.emplace(&p, idx);
    return Tensor{this, idx};
}

void Tape::clear() {
    nodes_.clear();
    param_nodes_.clear();
}

Scalar Tensor::scalar() const {
    const MatrixX& v = value();
    if (v.size() != 1)
        throw Error("scalar(): tensor has shape " + shape_str(v.rows(), v.cols()));
    return v(0, 0);
}

Tensor matmul(Tensor a, Tensor b) {
    require_same_tape(a, b, "matmul");
    if (a.cols() != b.rows())
        throw Error("matmul: inner dimensions disagree: " + shape_str(a.rows(), a.cols()) +
                    " * " + shape_str(b.rows(), b.cols()));
    Tape::Node n;
    n.op = Tape::Op::MatMul;
    n.parents = {a.node, b.node};
    n.val.noalias() = a.value() * b.value();
    return Tensor{a.tape, a.tape->emit(std::move(n))};
}

namespace {

Tensor elementwise(Tensor a, Tensor b, Tape::Op op, const char* name) {
    require_same_tape(a, b, name);
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(std::string(name) + ": shape mismatch: " + shape_str(a.rows(), a.cols()) +
                    " vs " + shape_str(b.rows(), b.cols()));
    Tape::Node n;
    n.op = op;
    n.parents = {a.node, b.node};
    switch (op) {
        case Tape::Op::Add: n.val = a.value() + b.value(); break;
        case Tape::Op::Sub: n.val = a.value() - b.value(); break;
        case Tape::Op::Mul: n.val = a.value().cwiseProduct(b.value()); break;
        default: throw Error("elementwise: bad op");
    }
    return Tensor{a.tape, a.tape->emit(std::move(n))};
}

}  // namespace

Tensor add(Tensor a, Tensor b) { return elementwise(a, b, Tape::Op::Add, "add"); }
Tensor sub(Tensor a, Tensor b) { return elementwise(a, b, Tape::Op::Sub, "sub"); }
Tensor mul(Tensor a, Tensor b) { return elementwise(a, b, Tape::Op::Mul, "mul"); }

Tensor unary(UnaryKind kind, Tensor x) {
    return kind == UnaryKind::Tanh ? tanh(x) : sigmoid(x);
}

Tensor tanh(Tensor x) {
    Tape::Node n;
    n.op = Tape::Op::Tanh;
    n.parents = {x.node};
    n.val = x.value().array().tanh();
    return Tensor{x.tape, x.tape->emit(std::move(n))};
}

Tensor sigmoid(Tensor x) {
    Tape::Node n;
    n.op = Tape::Op::Sigmoid;
    n.parents = {x.node};
    n.val = (1.0 / (1.0 + (-x.value().array()).exp())).matrix();
    return Tensor{x.tape, x.tape->emit(std::move(n))};
}

Tensor log(Tensor x) {
    Tape::Node n;
    n.op = Tape::Op::Log;
    n.parents = {x.node};
    n.val = x.value().array().log();
    return Tensor{x.tape, x.tape->emit(std::move(n))};
}

Tensor softmax(Tensor x) {
    require_vector(x, "softmax");
    if (x.size() < 1) throw Error("softmax: empty input");
    Tape::Node n;
    n.op = Tape::Op::Softmax;
    n.parents = {x.node};
    Eigen::ArrayXd shifted = x.value().col(0).array() - x.value().col(0).maxCoeff();
    Eigen::ArrayXd e = shifted.exp();
    n.val = (e / e.sum()).matrix();
    return Tensor{x.tape, x.tape->emit(std::move(n))};
}

Tensor concat(std::span<const Tensor> parts) {
    if (parts.empty()) throw Error("concat: no inputs");
    Tape* tape = parts[0].tape;
    Index total = 0;
    for (Tensor p : parts) {
        require_same_tape(parts[0], p, "concat");
        require_vector(p, "concat");
        total += p.size();
    }
    Tape::Node n;
    n.op = Tape::Op::Concat;
    n.val.resize(total, 1);
    Index off = 0;
    for (Tensor p : parts) {
        n.parents.push_back(p.node);
        n.val.block(off, 0, p.size(), 1) = p.value();
        off += p.size();
    }
    return Tensor{tape, tape->emit(std::move(n))};
}

Tensor concat(Tensor a, Tensor b) {
    const Tensor parts[] = {a, b};
    return concat(std::span<const Tensor>(parts, 2));
}

Tensor slice(Tensor x, Index offset, Index len) {
    require_vector(x, "slice");
    if (offset < 0 || len < 0 || offset + len > x.size())
        throw Error("slice: range [" + std::to_string(offset) + ", " +
                    std::to_string(offset + len) + ") out of bounds for length " +
                    std::to_string(x.size()));
    Tape::Node n;
    n.op = Tape::Op::Slice;
    n.parents = {x.node};
    n.a0 = offset;
    n.a1 = len;
    n.val = x.value().block(offset, 0, len, 1);
    return Tensor{x.tape, x.tape->emit(std::move(n))};
}

Tensor row(Tensor m, Index i) {
    if (i < 0 || i >= m.rows())
        throw Error("row: index " + std::to_string(i) + " out of bounds for " +
                    shape_str(m.rows(), m.cols()));
    Tape::Node n;
    n.op = Tape::Op::Row;
    n.parents = {m.node};
    n.a0 = i;
    n.val = m.value().row(i).transpose();
    return Tensor{m.tape, m.tape->emit(std::move(n))};
}

Tensor sum(Tensor x) {
    Tape::Node n;
    n.op = Tape::Op::Sum;
    n.parents = {x.node};
    n.val = MatrixX::Constant(1, 1, x.value().sum());
    return Tensor{x.tape, x.tape->emit(std::move(n))};
}

Tensor dot(Tensor a, Tensor b) {
    require_same_tape(a, b, "dot");
    require_vector(a, "dot");
    require_vector(b, "dot");
    if (a.size() != b.size())
        throw Error("dot: length mismatch: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
    Tape::Node n;
    n.op = Tape::Op::Dot;
    n.parents = {a.node, b.node};
    n.val = MatrixX::Constant(1, 1, a.value().col(0).dot(b.value().col(0)));
    return Tensor{a.tape, a.tape->emit(std::move(n))};
}

Tensor element(Tensor x, Index i) {
    require_vector(x, "element");
    if (i < 0 || i >= x.size())
        throw Error("element: index " + std::to_string(i) + " out of bounds for length " +
                    std::to_string(x.size()));
    Tape::Node n;
    n.op = Tape::Op::Element;
    n.parents = {x.node};
    n.a0 = i;
    n.val = MatrixX::Constant(1, 1, x.value()(i, 0));
    return Tensor{x.tape, x.tape->emit(std::move(n))};
}

Tensor scale(Tensor x, Tensor s) {
    require_same_tape(x, s, "scale");
    if (s.size() != 1)
        throw Error("scale: scale factor must be scalar, got " + shape_str(s.rows(), s.cols()));
    Tape::Node n;
    n.op = Tape::Op::Scale;
    n.parents = {x.node, s.node};
    n.val = x.value() * s.value()(0, 0);
    return Tensor{x.tape, x.tape->emit(std::move(n))};
}

Tensor scale(Tensor x, Scalar c) {
    Tape::Node n;
    n.op = Tape::Op::ScaleConst;
    n.parents = {x.node};
    n.c = c;
    n.val = x.value() * c;
    return Tensor{x.tape, x.tape->emit(std::move(n))};
}

Tensor weighted_sum(std::span<const Tensor> items, Tensor weights) {
    if (items.empty()) throw Error("weighted_sum: no items");
    require_vector(weights, "weighted_sum");
    if (static_cast<Index>(items.size()) != weights.size())
        throw Error("weighted_sum: " + std::to_string(items.size()) + " items vs " +
                    std::to_string(weights.size()) + " weights");
    Tape::Node n;
    n.op = Tape::Op::WeightedSum;
    n.val = MatrixX::Zero(items[0].rows(), 1);
    for (std::size_t i = 0; i < items.size(); ++i) {
        require_same_tape(weights, items[i], "weighted_sum");
        require_vector(items[i], "weighted_sum");
        if (items[i].rows() != n.val.rows())
            throw Error("weighted_sum: item length mismatch");
        n.parents.push_back(items[i].node);
        n.val += items[i].value() * weights.value()(static_cast<Index>(i), 0);
    }
    n.parents.push_back(weights.node);
    return Tensor{weights.tape, weights.tape->emit(std::move(n))};
}

void Tape::backward(Tensor loss) {
    backward(loss, [](Parameter& p) { return &p.grad; });
}

void Tape::backward(Tensor loss, const GradSink& sink) {
    if (loss.tape != this) throw Error("backward: loss recorded on a different tape");
    if (loss.size() != 1)
        throw Error("backward: loss must be scalar, got " +
                    shape_str(loss.rows(), loss.cols()));

    // each call is an independent pass: start from clean node gradients
    for (Node& n : nodes_) n.grad.resize(0, 0);
    grad_of(loss.node)(0, 0) = 1.0;

    for (int i = loss.node; i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.grad.size() == 0) continue;
        const MatrixX& g = n.grad;
        switch (n.op) {
            case Op::Leaf:
                if (n.param && n.param->trainable) {
                    if (MatrixX* dst = sink(*n.param)) *dst += g;
                }
                break;
            case Op::MatMul: {
                const Node& a = nodes_[n.parents[0]];
                const Node& b = nodes_[n.parents[1]];
                grad_of(n.parents[0]).noalias() += g * b.value().transpose();
                grad_of(n.parents[1]).noalias() += a.value().transpose() * g;
                break;
            }
            case Op::Add:
                grad_of(n.parents[0]) += g;
                grad_of(n.parents[1]) += g;
                break;
            case Op::Sub:
                grad_of(n.parents[0]) += g;
                grad_of(n.parents[1]) -= g;
                break;
            case Op::Mul:
                grad_of(n.parents[0]) += g.cwiseProduct(nodes_[n.parents[1]].value());
                grad_of(n.parents[1]) += g.cwiseProduct(nodes_[n.parents[0]].value());
                break;
            case Op::Tanh:
                grad_of(n.parents[0]).array() += g.array() * (1.0 - n.val.array().square());
                break;
            case Op::Sigmoid:
                grad_of(n.parents[0]).array() +=
                    g.array() * n.val.array() * (1.0 - n.val.array());
                break;
            case Op::Log:
                grad_of(n.parents[0]).array() +=
                    g.array() / nodes_[n.parents[0]].value().array();
                break;
            case Op::Softmax: {
                // dL/dx = s .* (g - <g, s>)
                Scalar gs = g.col(0).dot(n.val.col(0));
                grad_of(n.parents[0]).array() += n.val.array() * (g.array() - gs);
                break;
            }
            case Op::Concat: {
                Index off = 0;
                for (int p : n.parents) {
                    Index len = nodes_[p].value().rows();
                    grad_of(p) += g.block(off, 0, len, 1);
                    off += len;
                }
                break;
            }
            case Op::Slice:
                grad_of(n.parents[0]).block(n.a0, 0, n.a1, 1) += g;
                break;
            case Op::Row:
                grad_of(n.parents[0]).row(n.a0) += g.transpose();
                break;
            case Op::Sum:
                grad_of(n.parents[0]).array() += g(0, 0);
                break;
            case Op::Dot:
                grad_of(n.parents[0]) += g(0, 0) * nodes_[n.parents[1]].value();
                grad_of(n.parents[1]) += g(0, 0) * nodes_[n.parents[0]].value();
                break;
            case Op::Element:
                grad_of(n.parents[0])(n.a0, 0) += g(0, 0);
                break;
            case Op::Scale: {
                Scalar s = nodes_[n.parents[1]].value()(0, 0);
                grad_of(n.parents[0]) += g * s;
                grad_of(n.parents[1])(0, 0) +=
                    g.cwiseProduct(nodes_[n.parents[0]].value()).sum();
                break;
            }
            case Op::ScaleConst:
                grad_of(n.parents[0]) += g * n.c;
                break;
            case Op::WeightedSum: {
                int wnode = n.parents.back();
                const MatrixX& w = nodes_[wnode].value();
                MatrixX& wg = grad_of(wnode);
                for (std::size_t k = 0; k + 1 < n.parents.size(); ++k) {
                    int p = n.parents[k];
                    grad_of(p) += g * w(static_cast<Index>(k), 0);
                    wg(static_cast<Index>(k), 0) += g.col(0).dot(nodes_[p].value().col(0));
                }
                break;
            }
        }
    }
}

Scalar grad_check(const std::function<Tensor(Tape&)>& f,
                  std::span<Parameter* const> params, Scalar epsilon) {
    if (epsilon <= 0) throw Error("grad_check: epsilon must be positive");

    for (Parameter* p : params) p->zero_grad();
    Tape tape;
    Tensor loss = f(tape);
    if (loss.size() != 1) throw Error("grad_check: f must return a scalar");
    if (!std::isfinite(loss.scalar())) throw Error("grad_check: non-finite loss");
    tape.backward(loss);

    std::vector<MatrixX> analytic;
    analytic.reserve(params.size());
    for (Parameter* p : params) analytic.push_back(p->grad);

    auto eval = [&](void) -> Scalar {
        Tape t;
        Scalar v = f(t).scalar();
        if (!std::isfinite(v)) throw Error("grad_check: non-finite intermediate value");
        return v;
    };

    Scalar worst = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        MatrixX& v = params[pi]->value;
        for (Index r = 0; r < v.rows(); ++r) {
            for (Index c = 0; c < v.cols(); ++c) {
                Scalar saved = v(r, c);
                v(r, c) = saved + epsilon;
                Scalar up = eval();
                v(r, c) = saved - epsilon;
                Scalar down = eval();
                v(r, c) = saved;
                Scalar numeric = (up - down) / (2.0 * epsilon);
                Scalar a = analytic[pi](r, c);
                Scalar err = std::abs(a - numeric) /
                             std::max(1e-8, std::abs(a) + std::abs(numeric));
                worst = std::max(worst, err);
            }
        }
    }
    return worst;
}

}  // namespace punct
