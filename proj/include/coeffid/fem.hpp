#pragma once

#include <span>
#include <vector>

#include "coeffid/fe_function.hpp"
#include "coeffid/sparse.hpp"

namespace coeffid {

/// Consistent P1 mass matrix over all nodes.
CsrMatrix assemble_mass(const Mesh& mesh);

/// P1 stiffness matrix with coefficient q over all nodes.
///
/// The coefficient enters through its element mean, which integrates a P1
/// coefficient exactly since basis gradients are elementwise constant:
///   K_ij = sum_T |T| mean_T(q) grad(phi_i) . grad(phi_j).
/// Throws std::invalid_argument if some nodal value of q is not positive.
CsrMatrix assemble_stiffness(const Mesh& mesh, std::span<const double> q);
CsrMatrix assemble_stiffness(const FeFunction& q);

/// Unit-coefficient stiffness K_1, the Gram matrix of the H^1 seminorm.
CsrMatrix assemble_laplacian(const Mesh& mesh);

/// Load vector b_i = (f, phi_i) by the vertex rule, over all nodes.
std::vector<double> assemble_load(const Mesh& mesh, const ScalarField& f);

/// Rows and columns of interior nodes only (zero Dirichlet reduction).
CsrMatrix restrict_interior(const Mesh& mesh, const CsrMatrix& full);
std::vector<double> gather_interior(const Mesh& mesh, std::span<const double> full);
/// Expand interior unknowns to nodal values with zeros on the boundary.
std::vector<double> scatter_interior(const Mesh& mesh, std::span<const double> interior);

/// L2 projection onto the zero-trace space.
FeFunction l2_project(const MeshPtr& mesh, const ScalarField& f);
/// Nodal interpolation onto the full space.
FeFunction lagrange_interpolate(const MeshPtr& mesh, const ScalarField& f);

/// (u, v)_{L2} and (grad u, grad v)_{L2} of P1 nodal vectors, computed element by element.
double mass_inner(const Mesh& mesh, std::span<const double> u, std::span<const double> v);
double stiffness_inner(const Mesh& mesh, std::span<const double> u, std::span<const double> v);

double norm_l2(const FeFunction& v);
double seminorm_h1(const FeFunction& v);
double norm_linf(const FeFunction& v);

/// Nodal vector g_j = sum_{T containing j} (grad u . grad p)|_T |T| / (d+1).
/// This is the derivative of (q grad u, grad p) with respect to the nodal value q_j.
std::vector<double> coefficient_sensitivity(const Mesh& mesh, std::span<const double> u,
                                            std::span<const double> p);

/// Constant gradient of the P1 function u on element e.
Point element_gradient(const Mesh& mesh, std::size_t e, std::span<const double> u);

}  // namespace coeffid
