#include "calql/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace calql::nn {

namespace {

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    require(static_cast<bool>(is), ErrorKind::IoError, "tensor file truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& os, double d) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(d));
    std::memcpy(&bits, &d, 8);
    write_u64(os, bits);
}

double read_f64(std::istream& is) {
    std::uint64_t bits = read_u64(is);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

}  // namespace

void write_tensor_file(const std::string& path, const std::vector<const Tensor*>& tensors) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), ErrorKind::IoError, "cannot open for writing: " + path);
    write_u64(os, tensors.size());
    for (const Tensor* t : tensors) {
        write_u64(os, t->shape.size());
        for (std::size_t d : t->shape) write_u64(os, d);
        for (double v : t->data) write_f64(os, v);
    }
    require(os.good(), ErrorKind::IoError, "write failed: " + path);
}

std::vector<Tensor> read_tensor_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), ErrorKind::IoError, "cannot open for reading: " + path);
    const std::uint64_t count = read_u64(is);
    std::vector<Tensor> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t rank = read_u64(is);
        require(rank <= 8, ErrorKind::ParseError, "tensor rank implausibly large");
        std::vector<std::size_t> shape(rank);
        std::size_t n = 1;
        for (std::uint64_t d = 0; d < rank; ++d) {
            shape[d] = static_cast<std::size_t>(read_u64(is));
            n *= shape[d];
        }
        std::vector<double> data(n);
        for (std::size_t j = 0; j < n; ++j) data[j] = read_f64(is);
        out.emplace_back(std::move(shape), std::move(data));
    }
    return out;
}

void save_mlp(const Mlp& net, const std::string& prefix) {
    write_tensor_file(prefix + ".weights.bin", net.parameters());
    std::ofstream os(prefix + ".manifest");
    require(os.good(), ErrorKind::IoError, "cannot open for writing: " + prefix + ".manifest");
    os << "format mlp-v1\n";
    os << "activation " << (net.activation == Activation::Tanh ? "tanh" : "relu") << "\n";
    os << "widths";
    for (std::size_t w : net.widths) os << " " << w;
    os << "\n";
    require(os.good(), ErrorKind::IoError, "write failed: " + prefix + ".manifest");
}

Mlp load_mlp(const std::string& prefix) {
    std::ifstream is(prefix + ".manifest");
    require(is.good(), ErrorKind::IoError, "cannot open for reading: " + prefix + ".manifest");
    std::string line, key;
    Activation act = Activation::Tanh;
    std::vector<std::size_t> widths;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        ls >> key;
        if (key == "format") {
            std::string fmt;
            ls >> fmt;
            require(fmt == "mlp-v1", ErrorKind::ParseError, "unknown checkpoint format: " + fmt);
        } else if (key == "activation") {
            std::string a;
            ls >> a;
            require(a == "tanh" || a == "relu", ErrorKind::ParseError, "unknown activation: " + a);
            act = a == "tanh" ? Activation::Tanh : Activation::Relu;
        } else if (key == "widths") {
            std::size_t w;
            while (ls >> w) widths.push_back(w);
        } else if (!key.empty()) {
            fail(ErrorKind::ParseError, "unknown manifest key: " + key);
        }
        key.clear();
    }
    require(widths.size() >= 2, ErrorKind::ParseError, "manifest missing widths");

    Mlp net = Mlp::zeros(widths, act);
    std::vector<Tensor> tensors = read_tensor_file(prefix + ".weights.bin");
    auto params = net.parameters();
    require(tensors.size() == params.size(), ErrorKind::ParseError, "checkpoint tensor count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        require(params[i]->shape == tensors[i].shape, ErrorKind::ParseError,
                "checkpoint tensor shape mismatch");
        *params[i] = std::move(tensors[i]);
    }
    return net;
}

}  // namespace calql::nn
