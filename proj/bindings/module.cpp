// Python bindings for the core operations: FFT, the three block components,
// the physics data generator and a small model wrapper.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mppa/fft.hpp"
#include "mppa/harness.hpp"
#include "mppa/numerics.hpp"

namespace py = pybind11;
using namespace mppa;

namespace {

TensorF tensor_from_array(const py::array_t<double>& arr) {
    const py::buffer_info info = arr.request();
    std::vector<std::size_t> shape(info.shape.begin(), info.shape.end());
    py::array_t<double> contiguous = py::array_t<double>::ensure(arr);
    const double* data = static_cast<const double*>(contiguous.request().ptr);
    TensorF t(shape);
    std::copy(data, data + t.size(), t.data.begin());
    return t;
}

py::array_t<double> array_from_tensor(const TensorF& t) {
    py::array_t<double> arr(t.shape);
    std::copy(t.data.begin(), t.data.end(),
              static_cast<double*>(arr.request().ptr));
    return arr;
}

// Owns parameters plus config; exposes the plain forward-path API.
struct PyModel {
    ModelConfig cfg;
    ModelParams params;

    PyModel(std::size_t vocab, std::size_t d, std::size_t layers, std::size_t heads,
            std::size_t chunk_size, std::size_t n_max, std::uint64_t seed) {
        cfg.vocab_size = vocab;
        cfg.d = d;
        cfg.layers = layers;
        cfg.heads = heads;
        cfg.chunk_size = chunk_size;
        cfg.n_max = n_max;
        cfg.validate();
        Rng rng(seed);
        params = init_model(cfg, rng);
    }

    explicit PyModel(const std::string& checkpoint_path) {
        cfg = load_checkpoint(checkpoint_path, params);
    }

    py::array_t<double> logits(const std::vector<int>& tokens) const {
        return array_from_tensor(model_forward(params, cfg, tokens));
    }

    std::pair<double, double> loss(const std::vector<int>& tokens) const {
        const LossResult res = sequence_loss(params, cfg, tokens);
        return {res.loss, res.perplexity};
    }

    std::vector<int> decode(const std::vector<int>& prompt, std::size_t total_len) const {
        return greedy_decode(params, cfg, prompt, total_len);
    }

    void save(const std::string& path) const { save_checkpoint(path, params, cfg); }
};

}  // namespace

PYBIND11_MODULE(_mppa, m) {
    m.doc() = "physics-principled sequence model core";

    m.def(
        "fft_forward",
        [](const std::vector<double>& re, const std::vector<double>& im) {
            const ComplexVec out = fft_forward(ComplexVec(re, im));
            return std::make_pair(out.re, out.im);
        },
        py::arg("re"), py::arg("im"));

    m.def("softmax_rows", [](const py::array_t<double>& scores) {
        return array_from_tensor(softmax_rows(tensor_from_array(scores)));
    });

    m.def(
        "causal_attention",
        [](const py::array_t<double>& h, std::size_t heads, std::uint64_t seed) {
            const TensorF ht = tensor_from_array(h);
            Rng rng(seed);
            const AttentionParams p = init_attention(ht.cols(), heads, rng);
            return array_from_tensor(causal_attention(ht, p));
        },
        py::arg("h"), py::arg("heads"), py::arg("seed"),
        "Attention with seeded random projections.");

    m.def(
        "energy_encode",
        [](const py::array_t<double>& h, double intensity, std::size_t chunk_size) {
            EnergyParams p;
            p.intensity = intensity;
            return array_from_tensor(energy_encode(tensor_from_array(h), p, chunk_size));
        },
        py::arg("h"), py::arg("intensity"), py::arg("chunk_size"));

    m.def(
        "periodicity_encode",
        [](const py::array_t<double>& h, std::size_t chunk_size, std::uint64_t seed,
           double weight_scale) {
            const TensorF ht = tensor_from_array(h);
            PeriodicityParams p = init_periodicity(ht.cols(), 2 * ht.cols());
            Rng rng(seed);
            for (double& v : p.mlp_w1.data) v = weight_scale * rng.normal();
            for (double& v : p.mlp_w2.data) v = weight_scale * rng.normal();
            return array_from_tensor(periodicity_encode(ht, p, chunk_size));
        },
        py::arg("h"), py::arg("chunk_size"), py::arg("seed") = 0,
        py::arg("weight_scale") = 0.0,
        "weight_scale=0 keeps the modulation MLP at its identity init.");

    m.def(
        "simulate",
        [](const std::string& kind, const std::vector<double>& initial, double dt,
           std::size_t steps, double omega, double gamma, double mu) {
            SystemSpec spec;
            spec.kind = kind_from_name(kind);
            spec.initial_state = initial;
            spec.dt = dt;
            spec.steps = steps;
            spec.omega = omega;
            spec.gamma = gamma;
            spec.mu = mu;
            const Trajectory traj = simulate(spec);
            return std::make_pair(traj.times, traj.states);
        },
        py::arg("kind"), py::arg("initial"), py::arg("dt") = 1e-3,
        py::arg("steps") = 1000, py::arg("omega") = 1.0, py::arg("gamma") = 0.0,
        py::arg("mu") = 1.0);

    m.def(
        "tokenize",
        [](const std::vector<std::vector<double>>& states, double value_min,
           double value_max, std::size_t bins, std::size_t seq_len) {
            Trajectory traj;
            traj.states = states;
            traj.times.resize(states.size(), 0.0);
            TokenizerSpec tok;
            tok.value_min = value_min;
            tok.value_max = value_max;
            tok.bins = bins;
            tok.seq_len = seq_len;
            return tokenize(traj, tok);
        },
        py::arg("states"), py::arg("value_min") = -4.0, py::arg("value_max") = 4.0,
        py::arg("bins") = 62, py::arg("seq_len") = 64);

    m.def(
        "generate_dataset",
        [](const std::string& out_path, std::size_t count, std::uint64_t seed) {
            DatasetConfig cfg;
            cfg.count = count;
            generate_dataset(cfg, seed, out_path);
        },
        py::arg("out_path"), py::arg("count"), py::arg("seed"));

    py::class_<PyModel>(m, "Model")
        .def(py::init<std::size_t, std::size_t, std::size_t, std::size_t, std::size_t,
                      std::size_t, std::uint64_t>(),
             py::arg("vocab") = 64, py::arg("d") = 32, py::arg("layers") = 2,
             py::arg("heads") = 4, py::arg("chunk_size") = 8, py::arg("n_max") = 128,
             py::arg("seed") = 0)
        .def(py::init<const std::string&>(), py::arg("checkpoint_path"))
        .def("logits", &PyModel::logits, py::arg("tokens"))
        .def("loss", &PyModel::loss, py::arg("tokens"))
        .def("decode", &PyModel::decode, py::arg("prompt"), py::arg("total_len"))
        .def("save", &PyModel::save, py::arg("path"));
}
