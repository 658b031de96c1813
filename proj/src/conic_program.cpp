#include "kurnet/conic.hpp"

#include <sstream>
#include <stdexcept>

namespace kurnet::conic {

const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

void Program::check_var(int v) const {
    if (v < 0 || v >= variable_count())
        throw std::invalid_argument("conic::Program: undeclared variable " + std::to_string(v));
}

int Program::add_variable(std::string name) {
    names_.push_back(std::move(name));
    return variable_count() - 1;
}

void Program::add_objective_term(int var, double coeff) {
    check_var(var);
    objective_.emplace_back(var, coeff);
}

int Program::add_equality(const std::vector<std::pair<int, double>>& terms, double rhs) {
    for (const auto& [v, c] : terms) check_var(v);
    eq_rows_.push_back(terms);
    eq_rhs_.push_back(rhs);
    return equality_count() - 1;
}

int Program::add_inequality(const std::vector<std::pair<int, double>>& terms, double rhs) {
    for (const auto& [v, c] : terms) check_var(v);
    ineq_rows_.push_back(terms);
    ineq_rhs_.push_back(rhs);
    return inequality_count() - 1;
}

void Program::add_bounds(int var, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("conic::Program: empty bound interval");
    add_inequality({{var, 1.0}}, hi);
    add_inequality({{var, -1.0}}, -lo);
}

int Program::add_psd_block(int dim) {
    if (dim < 1) throw std::invalid_argument("conic::Program: PSD block dim must be positive");
    psd_dims_.push_back(dim);
    return psd_block_count() - 1;
}

void Program::add_psd_coeff(int block, int r, int c, int var, double coeff) {
    check_var(var);
    const int d = psd_dims_.at(block);
    if (r < 0 || c < 0 || r >= d || c >= d)
        throw std::invalid_argument("conic::Program: PSD entry out of range");
    psd_terms_.push_back({block, r, c, var, coeff});
}

void Program::add_psd_const(int block, int r, int c, double value) {
    const int d = psd_dims_.at(block);
    if (r < 0 || c < 0 || r >= d || c >= d)
        throw std::invalid_argument("conic::Program: PSD entry out of range");
    psd_terms_.push_back({block, r, c, -1, value});
}

std::string Program::dump() const {
    std::ostringstream os;
    os << "variables " << variable_count() << "\n";
    for (int v = 0; v < variable_count(); ++v) os << "  " << v << " " << names_[v] << "\n";
    os << "objective";
    for (const auto& [v, c] : objective_) os << " " << v << ":" << c;
    os << "\n";
    os << "equalities " << equality_count() << "\n";
    for (int r = 0; r < equality_count(); ++r) {
        os << "  ";
        for (const auto& [v, c] : eq_rows_[r]) os << v << ":" << c << " ";
        os << "= " << eq_rhs_[r] << "\n";
    }
    os << "inequalities " << inequality_count() << "\n";
    for (int r = 0; r < inequality_count(); ++r) {
        os << "  ";
        for (const auto& [v, c] : ineq_rows_[r]) os << v << ":" << c << " ";
        os << "<= " << ineq_rhs_[r] << "\n";
    }
    os << "psd_blocks " << psd_block_count() << "\n";
    for (int b = 0; b < psd_block_count(); ++b) os << "  block " << b << " dim " << psd_dims_[b] << "\n";
    for (const auto& t : psd_terms_) {
        os << "  " << t.block << " (" << t.row << "," << t.col << ") ";
        if (t.var >= 0)
            os << "x" << t.var << " * " << t.coeff << "\n";
        else
            os << "const " << t.coeff << "\n";
    }
    return os.str();
}

}  // namespace kurnet::conic
