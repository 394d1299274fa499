#include "mman/tape.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "mman/errors.hpp"

namespace mman {

const Tensor& Var::value() const { return tape_->value(id_); }

int Tape::push(Tensor value, std::function<void()> back) {
    nodes_.push_back(Node{std::move(value), std::move(back)});
    grads_.emplace_back();
    touched_.push_back(0);
    return static_cast<int>(nodes_.size()) - 1;
}

Tensor& Tape::grad_buf(int id) {
    auto i = static_cast<std::size_t>(id);
    if (!touched_[i]) {
        grads_[i] = Tensor::zeros(nodes_[i].value.shape());
        touched_[i] = 1;
    }
    return grads_[i];
}

Var Tape::leaf(Tensor value) { return Var(this, push(std::move(value))); }

const Tensor& Tape::grad(Var v) const { return grads_[static_cast<std::size_t>(v.id())]; }

bool Tape::has_grad(Var v) const { return touched_[static_cast<std::size_t>(v.id())] != 0; }

void Tape::clear() {
    nodes_.clear();
    grads_.clear();
    touched_.clear();
}

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeMismatch(std::string(op) + " over " + a.shape_string() + " vs " + b.shape_string());
    }
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Var Tape::matmul(Var va, Var vb) {
    const Tensor& a = value(va.id());
    const Tensor& b = value(vb.id());

    int m, k, n;
    enum class Mode { mat_mat, mat_vec, vec_mat } mode;
    if (a.is_matrix() && b.is_matrix()) {
        mode = Mode::mat_mat;
        m = a.rows(); k = a.cols(); n = b.rows() == k ? b.cols() : -1;
    } else if (a.is_matrix() && b.is_vector()) {
        mode = Mode::mat_vec;
        m = a.rows(); k = a.cols(); n = b.dim(0) == k ? 1 : -1;
    } else if (a.is_vector() && b.is_matrix()) {
        mode = Mode::vec_mat;
        m = 1; k = a.dim(0); n = b.rows() == k ? b.cols() : -1;
    } else {
        throw ShapeMismatch("matmul over " + a.shape_string() + " vs " + b.shape_string());
    }
    if (n < 0) {
        throw ShapeMismatch("matmul inner dimension mismatch: " + a.shape_string() + " vs " + b.shape_string());
    }

    Tensor out = mode == Mode::mat_mat ? Tensor::zeros({m, n})
               : mode == Mode::mat_vec ? Tensor::zeros({m})
                                       : Tensor::zeros({n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int t = 0; t < k; ++t) acc += pa[i * k + t] * pb[t * n + j];
            po[i * n + j] = acc;
        }
    }

    int ia = va.id(), ib = vb.id();
    int out_id = push(std::move(out));
    // dA = dOut * B^T and dB = A^T * dOut, in flattened row-major form
    nodes_.back().backward = [this, ia, ib, out_id, m, k, n]() {
        const double* g = grads_[static_cast<std::size_t>(out_id)].data();
        const double* pa2 = nodes_[static_cast<std::size_t>(ia)].value.data();
        const double* pb2 = nodes_[static_cast<std::size_t>(ib)].value.data();
        double* ga = grad_buf(ia).data();
        double* gb = grad_buf(ib).data();
        for (int i = 0; i < m; ++i) {
            for (int t = 0; t < k; ++t) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j) acc += g[i * n + j] * pb2[t * n + j];
                ga[i * k + t] += acc;
            }
        }
        for (int t = 0; t < k; ++t) {
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int i = 0; i < m; ++i) acc += pa2[i * k + t] * g[i * n + j];
                gb[t * n + j] += acc;
            }
        }
    };
    return Var(this, out_id);
}

Var Tape::add(Var va, Var vb) {
    const Tensor& a = value(va.id());
    const Tensor& b = value(vb.id());
    check_same_shape(a, b, "add");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    int ia = va.id(), ib = vb.id();
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, ia, ib, out_id]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        Tensor& ga = grad_buf(ia);
        Tensor& gb = grad_buf(ib);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data()[i] += g.data()[i];
            gb.data()[i] += g.data()[i];
        }
    };
    return Var(this, out_id);
}

Var Tape::sub(Var va, Var vb) {
    const Tensor& a = value(va.id());
    const Tensor& b = value(vb.id());
    check_same_shape(a, b, "sub");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
    int ia = va.id(), ib = vb.id();
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, ia, ib, out_id]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        Tensor& ga = grad_buf(ia);
        Tensor& gb = grad_buf(ib);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data()[i] += g.data()[i];
            gb.data()[i] -= g.data()[i];
        }
    };
    return Var(this, out_id);
}

Var Tape::mul(Var va, Var vb) {
    const Tensor& a = value(va.id());
    const Tensor& b = value(vb.id());
    check_same_shape(a, b, "elementwise-multiply");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
    int ia = va.id(), ib = vb.id();
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, ia, ib, out_id]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        const Tensor& a2 = nodes_[static_cast<std::size_t>(ia)].value;
        const Tensor& b2 = nodes_[static_cast<std::size_t>(ib)].value;
        Tensor& ga = grad_buf(ia);
        Tensor& gb = grad_buf(ib);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data()[i] += g.data()[i] * b2.data()[i];
            gb.data()[i] += g.data()[i] * a2.data()[i];
        }
    };
    return Var(this, out_id);
}

Var Tape::scale(Var va, double k) {
    Tensor out = value(va.id());
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= k;
    int ia = va.id();
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, ia, out_id, k]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        Tensor& ga = grad_buf(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += k * g.data()[i];
    };
    return Var(this, out_id);
}

Var Tape::sigmoid(Var va) {
    Tensor out = value(va.id());
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = stable_sigmoid(out.data()[i]);
    int ia = va.id();
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, ia, out_id]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        const Tensor& y = nodes_[static_cast<std::size_t>(out_id)].value;
        Tensor& ga = grad_buf(ia);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data()[i] += g.data()[i] * y.data()[i] * (1.0 - y.data()[i]);
        }
    };
    return Var(this, out_id);
}

Var Tape::tanh(Var va) {
    Tensor out = value(va.id());
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::tanh(out.data()[i]);
    int ia = va.id();
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, ia, out_id]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        const Tensor& y = nodes_[static_cast<std::size_t>(out_id)].value;
        Tensor& ga = grad_buf(ia);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data()[i] += g.data()[i] * (1.0 - y.data()[i] * y.data()[i]);
        }
    };
    return Var(this, out_id);
}

Var Tape::relu(Var va) {
    Tensor out = value(va.id());
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = out.data()[i] > 0.0 ? out.data()[i] : 0.0;
    int ia = va.id();
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, ia, out_id]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        const Tensor& x = nodes_[static_cast<std::size_t>(ia)].value;
        Tensor& ga = grad_buf(ia);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (x.data()[i] > 0.0) ga.data()[i] += g.data()[i];
        }
    };
    return Var(this, out_id);
}

Var Tape::concat(Var va, Var vb) {
    const Tensor& a = value(va.id());
    const Tensor& b = value(vb.id());
    if (!a.is_vector() || !b.is_vector()) {
        throw ShapeMismatch("concat over " + a.shape_string() + " vs " + b.shape_string());
    }
    const int na = a.dim(0), nb = b.dim(0);
    Tensor out = Tensor::zeros({na + nb});
    for (int i = 0; i < na; ++i) out.at(i) = a.at(i);
    for (int i = 0; i < nb; ++i) out.at(na + i) = b.at(i);
    int ia = va.id(), ib = vb.id();
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, ia, ib, out_id, na, nb]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        Tensor& ga = grad_buf(ia);
        Tensor& gb = grad_buf(ib);
        for (int i = 0; i < na; ++i) ga.at(i) += g.at(i);
        for (int i = 0; i < nb; ++i) gb.at(i) += g.at(na + i);
    };
    return Var(this, out_id);
}

Var Tape::masked_softmax(Var vs, const std::vector<std::uint8_t>& mask) {
    const Tensor& s = value(vs.id());
    if (!s.is_vector()) throw ShapeMismatch("masked-softmax over " + s.shape_string());
    const int n = s.dim(0);
    if (mask.size() != static_cast<std::size_t>(n)) {
        throw ShapeMismatch("masked-softmax scores [" + std::to_string(n) + "] vs mask [" +
                            std::to_string(mask.size()) + "]");
    }
    // max-subtraction overflow guard over unmasked scores
    double mx = 0.0;
    bool any = false;
    for (int i = 0; i < n; ++i) {
        if (mask[i] && (!any || s.at(i) > mx)) { mx = s.at(i); any = true; }
    }
    if (!any) throw AllMasked();

    Tensor out = Tensor::zeros({n});
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
        if (mask[i]) {
            out.at(i) = std::exp(s.at(i) - mx);
            z += out.at(i);
        }
    }
    for (int i = 0; i < n; ++i) {
        if (mask[i]) out.at(i) /= z;
    }
    int is = vs.id();
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, is, out_id, mask]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        const Tensor& y = nodes_[static_cast<std::size_t>(out_id)].value;
        Tensor& gs = grad_buf(is);
        double dot = 0.0;
        const int n2 = y.dim(0);
        for (int i = 0; i < n2; ++i) {
            if (mask[i]) dot += g.at(i) * y.at(i);
        }
        for (int i = 0; i < n2; ++i) {
            if (mask[i]) gs.at(i) += y.at(i) * (g.at(i) - dot);
        }
    };
    return Var(this, out_id);
}

Var Tape::embedding_lookup(Var vt, const std::vector<int>& ids) {
    const Tensor& table = value(vt.id());
    if (!table.is_matrix()) throw ShapeMismatch("embedding-lookup over " + table.shape_string());
    const int v = table.rows(), e = table.cols();
    const int n = static_cast<int>(ids.size());
    Tensor out = Tensor::zeros({n, e});
    for (int i = 0; i < n; ++i) {
        if (ids[static_cast<std::size_t>(i)] < 0 || ids[static_cast<std::size_t>(i)] >= v) {
            throw ShapeMismatch("embedding index " + std::to_string(ids[static_cast<std::size_t>(i)]) +
                                " out of range for table " + table.shape_string());
        }
        for (int j = 0; j < e; ++j) out.at(i, j) = table.at(ids[static_cast<std::size_t>(i)], j);
    }
    int it = vt.id();
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, it, out_id, ids, e]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        Tensor& gt = grad_buf(it);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (int j = 0; j < e; ++j) gt.at(ids[i], j) += g.at(static_cast<int>(i), j);
        }
    };
    return Var(this, out_id);
}

Var Tape::row(Var vm, int r) {
    const Tensor& m = value(vm.id());
    if (!m.is_matrix()) throw ShapeMismatch("row slice of " + m.shape_string());
    if (r < 0 || r >= m.rows()) {
        throw ShapeMismatch("row " + std::to_string(r) + " out of range for " + m.shape_string());
    }
    const int c = m.cols();
    Tensor out = Tensor::zeros({c});
    for (int j = 0; j < c; ++j) out.at(j) = m.at(r, j);
    int im = vm.id();
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, im, out_id, r, c]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        Tensor& gm = grad_buf(im);
        for (int j = 0; j < c; ++j) gm.at(r, j) += g.at(j);
    };
    return Var(this, out_id);
}

Var Tape::sum_rows(Var vm) {
    const Tensor& m = value(vm.id());
    if (!m.is_matrix()) throw ShapeMismatch("sum-over-axis over " + m.shape_string());
    const int r = m.rows(), c = m.cols();
    Tensor out = Tensor::zeros({c});
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) out.at(j) += m.at(i, j);
    }
    int im = vm.id();
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, im, out_id, r, c]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        Tensor& gm = grad_buf(im);
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < c; ++j) gm.at(i, j) += g.at(j);
        }
    };
    return Var(this, out_id);
}

Var Tape::sum_all(Var va) {
    const Tensor& a = value(va.id());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i];
    int ia = va.id();
    int out_id = push(Tensor::scalar(acc));
    nodes_.back().backward = [this, ia, out_id]() {
        const double g = grads_[static_cast<std::size_t>(out_id)].item();
        Tensor& ga = grad_buf(ia);
        for (std::size_t i = 0; i < ga.size(); ++i) ga.data()[i] += g;
    };
    return Var(this, out_id);
}

Var Tape::stack_rows(const std::vector<Var>& rows) {
    if (rows.empty()) throw ShapeMismatch("stack_rows of zero rows");
    const int c = value(rows[0].id()).dim(0);
    const int n = static_cast<int>(rows.size());
    Tensor out = Tensor::zeros({n, c});
    std::vector<int> ids;
    ids.reserve(rows.size());
    for (int i = 0; i < n; ++i) {
        const Tensor& r = value(rows[static_cast<std::size_t>(i)].id());
        if (!r.is_vector() || r.dim(0) != c) {
            throw ShapeMismatch("stack_rows over " + r.shape_string() + " vs [" + std::to_string(c) + "]");
        }
        for (int j = 0; j < c; ++j) out.at(i, j) = r.at(j);
        ids.push_back(rows[static_cast<std::size_t>(i)].id());
    }
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, ids, out_id, c]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        for (std::size_t i = 0; i < ids.size(); ++i) {
            Tensor& gr = grad_buf(ids[i]);
            for (int j = 0; j < c; ++j) gr.at(j) += g.at(static_cast<int>(i), j);
        }
    };
    return Var(this, out_id);
}

Var Tape::dropout(Var va, double p, bool training, Rng& rng) {
    if (!training || p <= 0.0) {
        // exact identity, still recorded so gradients pass through unchanged
        Tensor out = value(va.id());
        int ia = va.id();
        int out_id = push(std::move(out));
        nodes_.back().backward = [this, ia, out_id]() {
            const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
            Tensor& ga = grad_buf(ia);
            for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i];
        };
        return Var(this, out_id);
    }
    const Tensor& a = value(va.id());
    const double keep = 1.0 - p;
    std::vector<std::uint8_t> kept(a.size());
    Tensor out = a;
    for (std::size_t i = 0; i < a.size(); ++i) {
        kept[i] = rng.uniform() >= p ? 1 : 0;
        out.data()[i] = kept[i] ? a.data()[i] / keep : 0.0;
    }
    int ia = va.id();
    int out_id = push(std::move(out));
    nodes_.back().backward = [this, ia, out_id, kept, keep]() {
        const Tensor& g = grads_[static_cast<std::size_t>(out_id)];
        Tensor& ga = grad_buf(ia);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (kept[i]) ga.data()[i] += g.data()[i] / keep;
        }
    };
    return Var(this, out_id);
}

Var Tape::cosine(Var va, Var vb) {
    const Tensor& a = value(va.id());
    const Tensor& b = value(vb.id());
    if (!a.is_vector() || !b.is_vector()) {
        throw ShapeMismatch("cosine over " + a.shape_string() + " vs " + b.shape_string());
    }
    check_same_shape(a, b, "cosine");
    const int n = a.dim(0);
    double dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (int i = 0; i < n; ++i) {
        dot += a.at(i) * b.at(i);
        na2 += a.at(i) * a.at(i);
        nb2 += b.at(i) * b.at(i);
    }
    const double na = std::sqrt(na2), nb = std::sqrt(nb2);
    const double denom = na * nb;
    constexpr double kDenomFloor = 1e-12;
    const bool degenerate = denom < kDenomFloor;
    const double c = degenerate ? 0.0 : dot / denom;

    int ia = va.id(), ib = vb.id();
    int out_id = push(Tensor::scalar(c));
    if (!degenerate) {
        nodes_.back().backward = [this, ia, ib, out_id, na, nb, c, n]() {
            const double g = grads_[static_cast<std::size_t>(out_id)].item();
            const Tensor& a2 = nodes_[static_cast<std::size_t>(ia)].value;
            const Tensor& b2 = nodes_[static_cast<std::size_t>(ib)].value;
            Tensor& ga = grad_buf(ia);
            Tensor& gb = grad_buf(ib);
            for (int i = 0; i < n; ++i) {
                ga.at(i) += g * (b2.at(i) / (na * nb) - c * a2.at(i) / (na * na));
                gb.at(i) += g * (a2.at(i) / (na * nb) - c * b2.at(i) / (nb * nb));
            }
        };
    }
    return Var(this, out_id);
}

void Tape::backward(Var loss) {
    const Tensor& l = value(loss.id());
    if (!l.is_scalar()) throw NotScalar();
    grad_buf(loss.id()).data()[0] = 1.0;
    for (int i = loss.id(); i >= 0; --i) {
        auto idx = static_cast<std::size_t>(i);
        if (!touched_[idx]) continue;  // unreachable from the loss
        if (nodes_[idx].backward) nodes_[idx].backward();
    }
}

}  // namespace mman
