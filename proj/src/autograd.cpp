#include "mppa/autograd.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mppa/fft.hpp"
#include "mppa/numerics.hpp"

namespace mppa {

Graph::Var Graph::make(TensorF value, std::function<void(Graph&)> back) {
    Node node;
    node.grad = TensorF(value.shape);
    node.value = std::move(value);
    node.back = std::move(back);
    nodes_.push_back(std::move(node));
    return static_cast<Var>(nodes_.size()) - 1;
}

Graph::Var Graph::input(TensorF value) { return make(std::move(value), nullptr); }

void Graph::backward(Var loss) {
    if (nodes_[loss].value.size() != 1)
        throw std::invalid_argument("backward: loss must be scalar");
    nodes_[loss].grad.data[0] = 1.0;
    for (int i = loss; i >= 0; --i)
        if (nodes_[i].back) nodes_[i].back(*this);
}

Graph::Var Graph::add(Var a, Var b) {
    require_same_shape(val(a), val(b), "add");
    TensorF out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += val(b).data[i];
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [a, b, o](Graph& gr) {
        for (std::size_t i = 0; i < gr.val(o).size(); ++i) {
            gr.g(a).data[i] += gr.g(o).data[i];
            gr.g(b).data[i] += gr.g(o).data[i];
        }
    };
    return o;
}

Graph::Var Graph::sub(Var a, Var b) {
    require_same_shape(val(a), val(b), "sub");
    TensorF out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= val(b).data[i];
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [a, b, o](Graph& gr) {
        for (std::size_t i = 0; i < gr.val(o).size(); ++i) {
            gr.g(a).data[i] += gr.g(o).data[i];
            gr.g(b).data[i] -= gr.g(o).data[i];
        }
    };
    return o;
}

Graph::Var Graph::mul(Var a, Var b) {
    require_same_shape(val(a), val(b), "mul");
    TensorF out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= val(b).data[i];
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [a, b, o](Graph& gr) {
        for (std::size_t i = 0; i < gr.val(o).size(); ++i) {
            gr.g(a).data[i] += gr.g(o).data[i] * gr.val(b).data[i];
            gr.g(b).data[i] += gr.g(o).data[i] * gr.val(a).data[i];
        }
    };
    return o;
}

Graph::Var Graph::matmul(Var a, Var b) {
    Var o = make(mppa::matmul(val(a), val(b)), nullptr);
    nodes_[o].back = [a, b, o](Graph& gr) {
        TensorF ga = mppa::matmul_nt(gr.g(o), gr.val(b));
        TensorF gb = mppa::matmul_tn(gr.val(a), gr.g(o));
        for (std::size_t i = 0; i < ga.size(); ++i) gr.g(a).data[i] += ga.data[i];
        for (std::size_t i = 0; i < gb.size(); ++i) gr.g(b).data[i] += gb.data[i];
    };
    return o;
}

Graph::Var Graph::matmul_nt(Var a, Var b) {
    Var o = make(mppa::matmul_nt(val(a), val(b)), nullptr);
    nodes_[o].back = [a, b, o](Graph& gr) {
        TensorF ga = mppa::matmul(gr.g(o), gr.val(b));
        TensorF gb = mppa::matmul_tn(gr.g(o), gr.val(a));
        for (std::size_t i = 0; i < ga.size(); ++i) gr.g(a).data[i] += ga.data[i];
        for (std::size_t i = 0; i < gb.size(); ++i) gr.g(b).data[i] += gb.data[i];
    };
    return o;
}

Graph::Var Graph::add_rowvec(Var x, Var b) {
    const std::size_t n = val(x).rows(), d = val(x).cols();
    if (val(b).size() != d)
        throw std::invalid_argument("add_rowvec: vector length mismatch");
    TensorF out = val(x);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out.at(i, j) += val(b).data[j];
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, b, o, n, d](Graph& gr) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                gr.g(x).at(i, j) += gr.g(o).at(i, j);
                gr.g(b).data[j] += gr.g(o).at(i, j);
            }
    };
    return o;
}

Graph::Var Graph::mul_rowvec(Var x, Var v) {
    const std::size_t n = val(x).rows(), d = val(x).cols();
    if (val(v).size() != d)
        throw std::invalid_argument("mul_rowvec: vector length mismatch");
    TensorF out = val(x);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out.at(i, j) *= val(v).data[j];
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, v, o, n, d](Graph& gr) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                gr.g(x).at(i, j) += gr.g(o).at(i, j) * gr.val(v).data[j];
                gr.g(v).data[j] += gr.g(o).at(i, j) * gr.val(x).at(i, j);
            }
    };
    return o;
}

Graph::Var Graph::mul_rows(Var x, Var r) {
    const std::size_t n = val(x).rows(), d = val(x).cols();
    if (val(r).size() != n)
        throw std::invalid_argument("mul_rows: row-scale length mismatch");
    TensorF out = val(x);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out.at(i, j) *= val(r).data[i];
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, r, o, n, d](Graph& gr) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                gr.g(x).at(i, j) += gr.g(o).at(i, j) * gr.val(r).data[i];
                acc += gr.g(o).at(i, j) * gr.val(x).at(i, j);
            }
            gr.g(r).data[i] += acc;
        }
    };
    return o;
}

Graph::Var Graph::mul_scalar(Var x, Var s) {
    if (val(s).size() != 1) throw std::invalid_argument("mul_scalar: s must be scalar");
    TensorF out = val(x);
    const double sv = val(s).data[0];
    for (double& v : out.data) v *= sv;
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, s, o](Graph& gr) {
        const double sv = gr.val(s).data[0];
        double acc = 0.0;
        for (std::size_t i = 0; i < gr.val(x).size(); ++i) {
            gr.g(x).data[i] += gr.g(o).data[i] * sv;
            acc += gr.g(o).data[i] * gr.val(x).data[i];
        }
        gr.g(s).data[0] += acc;
    };
    return o;
}

Graph::Var Graph::uexp(Var x) {
    TensorF out = val(x);
    for (double& v : out.data) v = std::exp(v);
    require_finite(out, "exp");
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, o](Graph& gr) {
        for (std::size_t i = 0; i < gr.val(x).size(); ++i)
            gr.g(x).data[i] += gr.g(o).data[i] * gr.val(o).data[i];
    };
    return o;
}

Graph::Var Graph::ulog(Var x) {
    TensorF out = val(x);
    for (double& v : out.data) v = std::log(v);
    require_finite(out, "log");
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, o](Graph& gr) {
        for (std::size_t i = 0; i < gr.val(x).size(); ++i)
            gr.g(x).data[i] += gr.g(o).data[i] / gr.val(x).data[i];
    };
    return o;
}

Graph::Var Graph::ulog1p(Var x) {
    TensorF out = val(x);
    for (double& v : out.data) v = std::log1p(v);
    require_finite(out, "log1p");
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, o](Graph& gr) {
        for (std::size_t i = 0; i < gr.val(x).size(); ++i)
            gr.g(x).data[i] += gr.g(o).data[i] / (1.0 + gr.val(x).data[i]);
    };
    return o;
}

Graph::Var Graph::usigmoid(Var x) {
    TensorF out = val(x);
    for (double& v : out.data) v = sigmoid(v);
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, o](Graph& gr) {
        for (std::size_t i = 0; i < gr.val(x).size(); ++i) {
            const double s = gr.val(o).data[i];
            gr.g(x).data[i] += gr.g(o).data[i] * s * (1.0 - s);
        }
    };
    return o;
}

Graph::Var Graph::usilu(Var x) {
    TensorF out = val(x);
    for (double& v : out.data) v = v * sigmoid(v);
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, o](Graph& gr) {
        for (std::size_t i = 0; i < gr.val(x).size(); ++i) {
            const double xv = gr.val(x).data[i];
            const double s = sigmoid(xv);
            gr.g(x).data[i] += gr.g(o).data[i] * s * (1.0 + xv * (1.0 - s));
        }
    };
    return o;
}

Graph::Var Graph::usquare(Var x) {
    TensorF out = val(x);
    for (double& v : out.data) v = v * v;
    require_finite(out, "square");
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, o](Graph& gr) {
        for (std::size_t i = 0; i < gr.val(x).size(); ++i)
            gr.g(x).data[i] += gr.g(o).data[i] * 2.0 * gr.val(x).data[i];
    };
    return o;
}

Graph::Var Graph::scale_const(Var x, double c) {
    TensorF out = val(x);
    for (double& v : out.data) v *= c;
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, o, c](Graph& gr) {
        for (std::size_t i = 0; i < gr.val(x).size(); ++i)
            gr.g(x).data[i] += gr.g(o).data[i] * c;
    };
    return o;
}

Graph::Var Graph::add_const(Var x, double c) {
    TensorF out = val(x);
    for (double& v : out.data) v += c;
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, o](Graph& gr) {
        for (std::size_t i = 0; i < gr.val(x).size(); ++i)
            gr.g(x).data[i] += gr.g(o).data[i];
    };
    return o;
}

Graph::Var Graph::sub_from_const(double c, Var x) {
    TensorF out = val(x);
    for (double& v : out.data) v = c - v;
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, o](Graph& gr) {
        for (std::size_t i = 0; i < gr.val(x).size(); ++i)
            gr.g(x).data[i] -= gr.g(o).data[i];
    };
    return o;
}

Graph::Var Graph::sum_all(Var x) {
    double acc = 0.0;
    for (double v : val(x).data) acc += v;
    Var o = make(TensorF::scalar(acc), nullptr);
    nodes_[o].back = [x, o](Graph& gr) {
        const double gv = gr.g(o).data[0];
        for (double& v : gr.g(x).data) v += gv;
    };
    return o;
}

Graph::Var Graph::mean_all(Var x) {
    const double inv = 1.0 / static_cast<double>(val(x).size());
    double acc = 0.0;
    for (double v : val(x).data) acc += v;
    Var o = make(TensorF::scalar(acc * inv), nullptr);
    nodes_[o].back = [x, o, inv](Graph& gr) {
        const double gv = gr.g(o).data[0] * inv;
        for (double& v : gr.g(x).data) v += gv;
    };
    return o;
}

Graph::Var Graph::matvec(Var x, Var w) {
    const std::size_t n = val(x).rows(), d = val(x).cols();
    if (val(w).size() != d) throw std::invalid_argument("matvec: length mismatch");
    TensorF out({n});
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += val(x).at(i, j) * val(w).data[j];
        out.data[i] = acc;
    }
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, w, o, n, d](Graph& gr) {
        for (std::size_t i = 0; i < n; ++i) {
            const double gv = gr.g(o).data[i];
            for (std::size_t j = 0; j < d; ++j) {
                gr.g(x).at(i, j) += gv * gr.val(w).data[j];
                gr.g(w).data[j] += gv * gr.val(x).at(i, j);
            }
        }
    };
    return o;
}

Graph::Var Graph::dot(Var a, Var b) {
    require_same_shape(val(a), val(b), "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < val(a).size(); ++i) acc += val(a).data[i] * val(b).data[i];
    Var o = make(TensorF::scalar(acc), nullptr);
    nodes_[o].back = [a, b, o](Graph& gr) {
        const double gv = gr.g(o).data[0];
        for (std::size_t i = 0; i < gr.val(a).size(); ++i) {
            gr.g(a).data[i] += gv * gr.val(b).data[i];
            gr.g(b).data[i] += gv * gr.val(a).data[i];
        }
    };
    return o;
}

Graph::Var Graph::slice_rows(Var x, std::size_t r0, std::size_t r1) {
    const std::size_t n = val(x).rows();
    const std::size_t d = val(x).size() / n;
    if (r0 >= r1 || r1 > n) throw std::invalid_argument("slice_rows: bad range");
    std::vector<std::size_t> shape = val(x).shape;
    shape[0] = r1 - r0;
    TensorF out(shape);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = val(x).data[r0 * d + i];
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, o, r0, d](Graph& gr) {
        for (std::size_t i = 0; i < gr.val(o).size(); ++i)
            gr.g(x).data[r0 * d + i] += gr.g(o).data[i];
    };
    return o;
}

Graph::Var Graph::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: empty");
    std::vector<std::size_t> shape = val(parts[0]).shape;
    std::size_t total = 0;
    for (Var p : parts) total += val(p).rows();
    shape[0] = total;
    TensorF out(shape);
    std::size_t off = 0;
    for (Var p : parts) {
        for (std::size_t i = 0; i < val(p).size(); ++i) out.data[off + i] = val(p).data[i];
        off += val(p).size();
    }
    Var o = make(std::move(out), nullptr);
    std::vector<Var> ps = parts;
    nodes_[o].back = [ps, o](Graph& gr) {
        std::size_t off = 0;
        for (Var p : ps) {
            for (std::size_t i = 0; i < gr.val(p).size(); ++i)
                gr.g(p).data[i] += gr.g(o).data[off + i];
            off += gr.val(p).size();
        }
    };
    return o;
}

Graph::Var Graph::pad_rows(Var x, std::size_t total_rows) {
    const std::size_t n = val(x).rows();
    const std::size_t d = val(x).size() / n;
    if (total_rows < n) throw std::invalid_argument("pad_rows: shrinking");
    std::vector<std::size_t> shape = val(x).shape;
    shape[0] = total_rows;
    TensorF out(shape);
    for (std::size_t i = 0; i < val(x).size(); ++i) out.data[i] = val(x).data[i];
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, o, n, d](Graph& gr) {
        for (std::size_t i = 0; i < n * d; ++i) gr.g(x).data[i] += gr.g(o).data[i];
    };
    return o;
}

Graph::Var Graph::mean_rows(Var x) {
    const std::size_t n = val(x).rows(), d = val(x).cols();
    TensorF out({d});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out.data[j] += val(x).at(i, j);
    const double inv = 1.0 / static_cast<double>(n);
    for (double& v : out.data) v *= inv;
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, o, n, d, inv](Graph& gr) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j)
                gr.g(x).at(i, j) += gr.g(o).data[j] * inv;
    };
    return o;
}

Graph::Var Graph::prefix_mean_rows(Var x) {
    const std::size_t n = val(x).rows(), d = val(x).cols();
    TensorF out({n, d});
    std::vector<double> run(d, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t j = 0; j < d; ++j) {
            run[j] += val(x).at(t, j);
            out.at(t, j) = run[j] / static_cast<double>(t + 1);
        }
    }
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, o, n, d](Graph& gr) {
        // g_in[s] = sum_{t >= s} g_out[t] / (t+1), via a suffix accumulator.
        std::vector<double> suffix(d, 0.0);
        for (std::size_t t = n; t-- > 0;) {
            for (std::size_t j = 0; j < d; ++j) {
                suffix[j] += gr.g(o).at(t, j) / static_cast<double>(t + 1);
                gr.g(x).at(t, j) += suffix[j];
            }
        }
    };
    return o;
}

Graph::Var Graph::broadcast_scalar(Var s, std::size_t n) {
    if (val(s).size() != 1) throw std::invalid_argument("broadcast_scalar: not scalar");
    TensorF out({n});
    for (double& v : out.data) v = val(s).data[0];
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [s, o](Graph& gr) {
        double acc = 0.0;
        for (double v : gr.g(o).data) acc += v;
        gr.g(s).data[0] += acc;
    };
    return o;
}

Graph::Var Graph::layernorm_rows(Var x, Var gain, Var bias, double eps) {
    const std::size_t n = val(x).rows(), d = val(x).cols();
    if (val(gain).size() != d || val(bias).size() != d)
        throw std::invalid_argument("layernorm_rows: param length mismatch");
    TensorF out({n, d});
    TensorF xhat({n, d});
    std::vector<double> inv_std(n);
    for (std::size_t i = 0; i < n; ++i) {
        double mu = 0.0;
        for (std::size_t j = 0; j < d; ++j) mu += val(x).at(i, j);
        mu /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double c = val(x).at(i, j) - mu;
            var += c * c;
        }
        var /= static_cast<double>(d);
        inv_std[i] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < d; ++j) {
            xhat.at(i, j) = (val(x).at(i, j) - mu) * inv_std[i];
            out.at(i, j) = val(gain).data[j] * xhat.at(i, j) + val(bias).data[j];
        }
    }
    Var o = make(std::move(out), nullptr);
    nodes_[o].back = [x, gain, bias, o, n, d, xhat, inv_std](Graph& gr) {
        for (std::size_t i = 0; i < n; ++i) {
            double mean_dxh = 0.0, mean_dxh_xh = 0.0;
            std::vector<double> dxh(d);
            for (std::size_t j = 0; j < d; ++j) {
                const double go = gr.g(o).at(i, j);
                gr.g(gain).data[j] += go * xhat.at(i, j);
                gr.g(bias).data[j] += go;
                dxh[j] = go * gr.val(gain).data[j];
                mean_dxh += dxh[j];
                mean_dxh_xh += dxh[j] * xhat.at(i, j);
            }
            mean_dxh /= static_cast<double>(d);
            mean_dxh_xh /= static_cast<double>(d);
            for (std::size_t j = 0; j < d; ++j)
                gr.g(x).at(i, j) +=
                    inv_std[i] * (dxh[j] - mean_dxh - xhat.at(i, j) * mean_dxh_xh);
        }
    };
    return o;
}

Graph::Var Graph::causal_softmax_rows(Var scores) {
    const std::size_t n = val(scores).rows();
    if (val(scores).cols() != n)
        throw std::invalid_argument("causal_softmax_rows: scores must be square");
    TensorF masked = val(scores);
    const double kNegInf = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) masked.at(i, j) = kNegInf;
    Var o = make(mppa::softmax_rows(masked), nullptr);
    nodes_[o].back = [scores, o, n](Graph& gr) {
        for (std::size_t i = 0; i < n; ++i) {
            double rowdot = 0.0;
            for (std::size_t j = 0; j <= i; ++j)
                rowdot += gr.g(o).at(i, j) * gr.val(o).at(i, j);
            for (std::size_t j = 0; j <= i; ++j)
                gr.g(scores).at(i, j) +=
                    gr.val(o).at(i, j) * (gr.g(o).at(i, j) - rowdot);
        }
    };
    return o;
}

Graph::Var Graph::spectrum_cols(Var chunk) {
    Var o = make(magnitude_spectrum_cols(val(chunk)), nullptr);
    nodes_[o].back = [chunk, o](Graph& gr) {
        magnitude_spectrum_cols_backward(gr.val(chunk), gr.g(o), gr.g(chunk));
    };
    return o;
}

Graph::Var Graph::embedding_rows(Var table, const std::vector<int>& ids) {
    const std::size_t vocab = val(table).rows(), d = val(table).cols();
    TensorF out({ids.size(), d});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab)
            throw std::out_of_range("embedding_rows: token id " + std::to_string(ids[i]) +
                                    " out of range at position " + std::to_string(i));
        for (std::size_t j = 0; j < d; ++j)
            out.at(i, j) = val(table).at(static_cast<std::size_t>(ids[i]), j);
    }
    Var o = make(std::move(out), nullptr);
    std::vector<int> idv = ids;
    nodes_[o].back = [table, o, idv, d](Graph& gr) {
        for (std::size_t i = 0; i < idv.size(); ++i)
            for (std::size_t j = 0; j < d; ++j)
                gr.g(table).at(static_cast<std::size_t>(idv[i]), j) += gr.g(o).at(i, j);
    };
    return o;
}

Graph::Var Graph::cross_entropy_mean(Var logits, const std::vector<int>& targets) {
    const std::size_t n = val(logits).rows(), vocab = val(logits).cols();
    if (targets.size() != n)
        throw std::invalid_argument("cross_entropy_mean: target count mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= vocab)
            throw std::out_of_range("cross_entropy_mean: target out of range at position " +
                                    std::to_string(i));
        double mx = val(logits).at(i, 0);
        for (std::size_t j = 1; j < vocab; ++j) mx = std::max(mx, val(logits).at(i, j));
        double lse = 0.0;
        for (std::size_t j = 0; j < vocab; ++j)
            lse += std::exp(val(logits).at(i, j) - mx);
        lse = mx + std::log(lse);
        total += lse - val(logits).at(i, static_cast<std::size_t>(targets[i]));
    }
    Var o = make(TensorF::scalar(total / static_cast<double>(n)), nullptr);
    std::vector<int> tv = targets;
    nodes_[o].back = [logits, o, tv, n, vocab](Graph& gr) {
        const double gv = gr.g(o).data[0] / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            double mx = gr.val(logits).at(i, 0);
            for (std::size_t j = 1; j < vocab; ++j)
                mx = std::max(mx, gr.val(logits).at(i, j));
            double lse = 0.0;
            for (std::size_t j = 0; j < vocab; ++j)
                lse += std::exp(gr.val(logits).at(i, j) - mx);
            for (std::size_t j = 0; j < vocab; ++j) {
                const double p = std::exp(gr.val(logits).at(i, j) - mx) / lse;
                const double onehot = (static_cast<std::size_t>(tv[i]) == j) ? 1.0 : 0.0;
                gr.g(logits).at(i, j) += gv * (p - onehot);
            }
        }
    };
    return o;
}

}  // namespace mppa
