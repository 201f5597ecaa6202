#include "h2lca/incidence.hpp"

#include "h2lca/errors.hpp"
#include "h2lca/textio.hpp"

#include <json.hpp>

#include <sstream>

namespace h2lca {

double IncidenceTensor::at(int operand, int buffer, int capability) const {
    const auto it = entries.find({operand, buffer, capability});
    return it == entries.end() ? 0.0 : it->second;
}

IncidenceTensor build_hfit(const SystemModel& m, TensorSign sign) {
    IncidenceTensor t;
    t.sign = sign;
    t.n_operands = static_cast<int>(m.operands.size());
    t.n_capabilities = static_cast<int>(m.capabilities.size());
    t.n_buffers = static_cast<int>(enumerate_buffers(m).size());

    for (std::size_t c = 0; c < m.capabilities.size(); ++c) {
        const Capability& cap = m.capabilities[c];
        for (const Flow& f : cap.flows) {
            const Resource* buf = m.find_resource(f.buffer);
            if (!buf) throw ModelError("capability '" + cap.id + "': unknown buffer '" + f.buffer + "'");
            if (buf->kind == ResourceKind::Transportation) {
                throw ModelError("capability '" + cap.id + "': flow at transportation resource '" +
                                 f.buffer + "', which carries no buffer index");
            }
            const int oi = m.operand_index(f.operand);
            if (oi < 0)
                throw ModelError("capability '" + cap.id + "': unknown operand '" + f.operand + "'");
            const bool is_pull = f.rate < 0.0;
            if ((sign == TensorSign::Negative) != is_pull) continue;
            const int bi = m.buffer_index(f.buffer);
            const auto key = std::make_tuple(oi, bi, static_cast<int>(c));
            t.entries[key] += f.rate < 0 ? -f.rate : f.rate;
        }
    }
    return t;
}

int IncidenceMatrix::row_index(const std::string& operand, const std::string& buffer) const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].operand == operand && rows[i].buffer == buffer) return static_cast<int>(i);
    }
    return -1;
}

int IncidenceMatrix::col_index(const std::string& capability) const {
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] == capability) return static_cast<int>(i);
    }
    return -1;
}

IncidenceMatrix matricize(const IncidenceTensor& neg, const IncidenceTensor& pos) {
    if (neg.sign != TensorSign::Negative || pos.sign != TensorSign::Positive)
        throw Error("matricize expects (negative, positive) tensors in that order");
    if (neg.n_operands != pos.n_operands || neg.n_buffers != pos.n_buffers ||
        neg.n_capabilities != pos.n_capabilities)
        throw Error("tensor dimensions disagree");

    IncidenceMatrix m;
    m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(neg.n_operands) * neg.n_buffers,
                                     neg.n_capabilities);
    for (const auto& [key, w] : pos.entries) {
        const auto [oi, bi, ci] = key;
        m.values(static_cast<Eigen::Index>(oi) * neg.n_buffers + bi, ci) += w;
    }
    for (const auto& [key, w] : neg.entries) {
        const auto [oi, bi, ci] = key;
        m.values(static_cast<Eigen::Index>(oi) * neg.n_buffers + bi, ci) -= w;
    }
    return m;
}

namespace {

// matricize() only sees tensors, which carry indices, not ids. The
// callers that need labeled rows build them from the model here.
void label(IncidenceMatrix& m, const SystemModel& model) {
    const auto buffers = enumerate_buffers(model);
    m.rows.clear();
    m.rows.reserve(model.operands.size() * buffers.size());
    for (const auto& o : model.operands) {
        for (const auto& b : buffers) m.rows.push_back({o.id, b.id});
    }
    m.cols.clear();
    for (const auto& c : model.capabilities) m.cols.push_back(c.id);
}

} // namespace

IncidenceMatrix build_incidence_matrix(const SystemModel& model) {
    IncidenceMatrix m = matricize(build_hfit(model, TensorSign::Negative),
                                  build_hfit(model, TensorSign::Positive));
    label(m, model);
    return m;
}

IncidenceMatrix eliminate_zero_rows(const IncidenceMatrix& m) {
    if (m.rows.size() != static_cast<std::size_t>(m.values.rows()))
        throw Error("matrix row labels are missing or inconsistent");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        bool nonzero = false;
        for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
            if (m.values(i, j) != 0.0) {
                nonzero = true;
                break;
            }
        }
        if (nonzero) keep.push_back(i);
    }
    IncidenceMatrix out;
    out.values.resize(static_cast<Eigen::Index>(keep.size()), m.values.cols());
    out.rows.reserve(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.values.row(static_cast<Eigen::Index>(k)) = m.values.row(keep[k]);
        out.rows.push_back(m.rows[static_cast<std::size_t>(keep[k])]);
    }
    out.cols = m.cols;
    out.reduced = true;
    return out;
}

int PartitionedMatrix::a_row_index(const std::string& operand, const std::string& buffer) const {
    for (std::size_t i = 0; i < a_rows.size(); ++i) {
        if (a_rows[i].operand == operand && a_rows[i].buffer == buffer) return static_cast<int>(i);
    }
    return -1;
}

int PartitionedMatrix::b_row_index_for_operand(const std::string& operand) const {
    for (std::size_t i = 0; i < b_rows.size(); ++i) {
        if (b_rows[i].operand == operand) return static_cast<int>(i);
    }
    return -1;
}

PartitionedMatrix partition(const IncidenceMatrix& m,
                            const std::set<std::string>& aspect_operands) {
    if (!m.reduced) throw ModelError("partition requires a reduced matrix");

    std::set<std::string> present;
    for (const auto& r : m.rows) present.insert(r.operand);
    for (const auto& a : aspect_operands) {
        if (!present.count(a))
            throw ModelError("aspect operand '" + a + "' has no row in the reduced matrix");
    }

    std::vector<Eigen::Index> a_idx, b_idx;
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        if (aspect_operands.count(m.rows[static_cast<std::size_t>(i)].operand))
            b_idx.push_back(i);
        else
            a_idx.push_back(i);
    }

    if (static_cast<Eigen::Index>(a_idx.size()) != m.values.cols()) {
        throw ModelError("A not square (" + std::to_string(a_idx.size()) + " rows, " +
                         std::to_string(m.values.cols()) + " columns)");
    }

    PartitionedMatrix p;
    p.cols = m.cols;
    p.aspects = aspect_operands;
    p.a.resize(static_cast<Eigen::Index>(a_idx.size()), m.values.cols());
    p.b.resize(static_cast<Eigen::Index>(b_idx.size()), m.values.cols());
    for (std::size_t k = 0; k < a_idx.size(); ++k) {
        p.a.row(static_cast<Eigen::Index>(k)) = m.values.row(a_idx[k]);
        p.a_rows.push_back(m.rows[static_cast<std::size_t>(a_idx[k])]);
    }
    for (std::size_t k = 0; k < b_idx.size(); ++k) {
        p.b.row(static_cast<Eigen::Index>(k)) = m.values.row(b_idx[k]);
        p.b_rows.push_back(m.rows[static_cast<std::size_t>(b_idx[k])]);
    }
    return p;
}

std::string matrix_to_csv(const IncidenceMatrix& m) {
    std::ostringstream out;
    out << "operand,buffer";
    for (const auto& c : m.cols) out << "," << c;
    out << "\n";
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        const auto& r = m.rows[static_cast<std::size_t>(i)];
        out << r.operand << "," << r.buffer;
        for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
            out << "," << fmt_double(m.values(i, j));
        }
        out << "\n";
    }
    return out.str();
}

std::string matrix_to_json(const IncidenceMatrix& m) {
    nlohmann::json j;
    j["reduced"] = m.reduced;
    j["row_map"] = nlohmann::json::array();
    for (const auto& r : m.rows) {
        j["row_map"].push_back({{"operand", r.operand}, {"buffer", r.buffer}});
    }
    j["col_map"] = m.cols;
    j["values"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index jx = 0; jx < m.values.cols(); ++jx) row.push_back(m.values(i, jx));
        j["values"].push_back(std::move(row));
    }
    return j.dump(2) + "\n";
}

} // namespace h2lca
