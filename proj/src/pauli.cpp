#include "scred/pauli.hpp"

#include "scred/error.hpp"

#include <cmath>
#include <complex>

namespace scred {

namespace {

using Complex = std::complex<double>;
constexpr char letters[4] = {'I', 'x', 'y', 'z'};

std::size_t power4(int n) { return std::size_t{1} << (2 * n); }

int digit(int qubits, std::size_t index, int q) {  // q = 0 is qubit 1
    return static_cast<int>((index >> (2 * (qubits - 1 - q))) & 3u);
}

// sigma|b> = phase |b ^ flip>
void apply(int qubits, std::size_t index, std::size_t b, std::size_t& out, Complex& phase) {
    out = b;
    phase = 1.0;
    for (int q = 0; q < qubits; ++q) {
        int d = digit(qubits, index, q);
        std::size_t mask = std::size_t{1} << (qubits - 1 - q);
        bool one = (b & mask) != 0;
        switch (d) {
            case 1: out ^= mask; break;
            case 2:
                out ^= mask;
                phase *= one ? Complex(0, -1) : Complex(0, 1);
                break;
            case 3:
                if (one) phase = -phase;
                break;
            default: break;
        }
    }
}

}  // namespace

PauliHamiltonian::PauliHamiltonian(int n) : qubits(n), coefficients(power4(n), 0.0) {}

std::string PauliHamiltonian::label(int qubits, std::size_t index) {
    std::string s;
    for (int q = 0; q < qubits; ++q) s += letters[digit(qubits, index, q)];
    return s;
}

std::size_t PauliHamiltonian::index(std::string_view label) {
    std::size_t idx = 0;
    for (char c : label) {
        int d;
        switch (c) {
            case 'I': case 'i': d = 0; break;
            case 'x': case 'X': d = 1; break;
            case 'y': case 'Y': d = 2; break;
            case 'z': case 'Z': d = 3; break;
            default: throw UnsupportedError("bad Pauli label '" + std::string(label) + "'");
        }
        idx = idx * 4 + static_cast<std::size_t>(d);
    }
    return idx;
}

int PauliHamiltonian::weight(int qubits, std::size_t index) {
    int w = 0;
    for (int q = 0; q < qubits; ++q) w += digit(qubits, index, q) != 0;
    return w;
}

Eigen::MatrixXcd PauliHamiltonian::matrix() const { return pauli_reconstruct(*this); }

Eigen::MatrixXcd pauli_string(int qubits, std::size_t index) {
    const std::size_t dim = std::size_t{1} << qubits;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t b = 0; b < dim; ++b) {
        std::size_t out;
        Complex ph;
        apply(qubits, index, b, out, ph);
        m(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(b)) = ph;
    }
    return m;
}

PauliHamiltonian pauli_decompose(const Eigen::MatrixXcd& h, double tolerance) {
    const Eigen::Index dim = h.rows();
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) ++n;
    if (h.cols() != dim || (Eigen::Index{1} << n) != dim)
        throw UnsupportedError("Pauli decomposition needs a 2^N x 2^N matrix");
    double anti = (h - h.adjoint()).cwiseAbs().maxCoeff() / 2.0;
    double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if (anti > tolerance * scale)
        throw UnsupportedError("matrix is not Hermitian: max anti-Hermitian component " + std::to_string(anti));
    PauliHamiltonian out(n);
    const double norm = 1.0 / static_cast<double>(dim);
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        Complex tr = 0.0;
        for (std::size_t b = 0; b < static_cast<std::size_t>(dim); ++b) {
            std::size_t o;
            Complex ph;
            apply(n, idx, b, o, ph);
            tr += h(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(o)) * ph;
        }
        out.coefficients[idx] = tr.real() * norm;
    }
    return out;
}

Eigen::MatrixXcd pauli_reconstruct(const PauliHamiltonian& h) {
    const Eigen::Index dim = Eigen::Index{1} << h.qubits;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t idx = 0; idx < h.size(); ++idx) {
        double c = h.coefficients[idx];
        if (c == 0.0) continue;
        for (std::size_t b = 0; b < static_cast<std::size_t>(dim); ++b) {
            std::size_t o;
            Complex ph;
            apply(h.qubits, idx, b, o, ph);
            m(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(b)) += c * ph;
        }
    }
    return m;
}

}  // namespace scred
