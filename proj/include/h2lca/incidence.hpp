#pragma once

#include "h2lca/system_model.hpp"

#include <Eigen/Dense>

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace h2lca {

enum class TensorSign { Negative, Positive };

/// Sparse third-order incidence tensor over (operand, buffer, capability).
/// The negative tensor records pulls, the positive tensor injections;
/// weights are the absolute flow rates.
struct IncidenceTensor {
    TensorSign sign = TensorSign::Negative;
    int n_operands = 0;
    int n_buffers = 0;
    int n_capabilities = 0;
    // (operand, buffer, capability) -> weight > 0
    std::map<std::tuple<int, int, int>, double> entries;

    double at(int operand, int buffer, int capability) const;
};

/// Builds one signed incidence tensor from the model's capability flows.
/// Throws ModelError if a flow sits at a transportation resource.
IncidenceTensor build_hfit(const SystemModel& m, TensorSign sign);

struct MatrixRow {
    std::string operand;
    std::string buffer;
};

/// Matricized incidence: rows are (operand, buffer) pairs in operand-major
/// declaration order, columns are capabilities in declaration order.
/// values(i, j) = injection - pull per firing.
struct IncidenceMatrix {
    Eigen::MatrixXd values;
    std::vector<MatrixRow> rows;
    std::vector<std::string> cols; // capability ids
    bool reduced = false;

    int row_index(const std::string& operand, const std::string& buffer) const;
    int col_index(const std::string& capability) const;
};

/// M = M+ - M- over the full |L|x|B_S| row space. Row and column labels
/// are not known to the tensors; build_incidence_matrix attaches them.
IncidenceMatrix matricize(const IncidenceTensor& neg, const IncidenceTensor& pos);

/// Full labeled incidence matrix straight from a model:
/// both tensors, matricized, with row/column maps attached.
IncidenceMatrix build_incidence_matrix(const SystemModel& model);

/// Drops rows whose entries are all exactly zero; sets reduced = true.
IncidenceMatrix eliminate_zero_rows(const IncidenceMatrix& m);

/// Row split of a reduced incidence matrix into product rows (A) and
/// environmental-aspect rows (B), classified by operand id.
struct PartitionedMatrix {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
    std::vector<MatrixRow> a_rows;
    std::vector<MatrixRow> b_rows;
    std::vector<std::string> cols;
    std::set<std::string> aspects;

    int a_row_index(const std::string& operand, const std::string& buffer) const;
    /// First B row whose operand matches; -1 if absent.
    int b_row_index_for_operand(const std::string& operand) const;
};

/// Splits rows by aspect operand ids, preserving row order within each
/// block. Requires a reduced matrix and a square A block:
/// throws ModelError "A not square (R rows, C columns)" otherwise.
/// Unknown aspect ids are rejected by name.
PartitionedMatrix partition(const IncidenceMatrix& m, const std::set<std::string>& aspect_operands);

/// CSV with header `operand,buffer,<capability ids...>`, one row per matrix row.
std::string matrix_to_csv(const IncidenceMatrix& m);

/// JSON object with row_map, col_map, reduced flag and dense values.
std::string matrix_to_json(const IncidenceMatrix& m);

} // namespace h2lca
