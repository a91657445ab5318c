#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace scred {

/// Real coefficients of all 4^N Pauli strings. Index digits are base 4 (I, x, y, z),
/// qubit 1 is the most significant digit and the most significant tensor factor.
struct PauliHamiltonian {
    int qubits = 0;
    std::vector<double> coefficients;

    explicit PauliHamiltonian(int n = 0);

    double operator[](std::string_view label) const { return coefficients[index(label)]; }
    double& operator[](std::string_view label) { return coefficients[index(label)]; }
    std::size_t size() const { return coefficients.size(); }

    static std::string label(int qubits, std::size_t index);
    static std::size_t index(std::string_view label);
    /// Number of non-identity factors in the string.
    static int weight(int qubits, std::size_t index);
    std::string label(std::size_t index) const { return label(qubits, index); }

    Eigen::MatrixXcd matrix() const;
};

Eigen::MatrixXcd pauli_string(int qubits, std::size_t index);

/// h_eta = Tr(H sigma_eta) / 2^N. Throws UnsupportedError if H is not Hermitian to `tolerance` (relative).
PauliHamiltonian pauli_decompose(const Eigen::MatrixXcd& h, double tolerance = 1e-10);
Eigen::MatrixXcd pauli_reconstruct(const PauliHamiltonian& h);

}  // namespace scred
