#include "h2lca/system_model.hpp"

#include "h2lca/errors.hpp"
#include "h2lca/textio.hpp"

#include <set>
#include <sstream>

namespace h2lca {

const char* to_string(ProcessKind k) {
    return k == ProcessKind::Transformation ? "transformation" : "refined-transportation";
}

const char* to_string(ResourceKind k) {
    switch (k) {
    case ResourceKind::Transformation: return "transformation";
    case ResourceKind::IndependentBuffer: return "independent-buffer";
    default: return "transportation";
    }
}

namespace {

template <class T>
const T* find_by_id(const std::vector<T>& v, const std::string& id) {
    for (const auto& e : v) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

ProcessKind parse_process_kind(const std::string& s, std::size_t line_no) {
    if (s == "transformation") return ProcessKind::Transformation;
    if (s == "refined-transportation") return ProcessKind::RefinedTransportation;
    throw ParseError(line_no, "unknown process kind '" + s + "'");
}

ResourceKind parse_resource_kind(const std::string& s, std::size_t line_no) {
    if (s == "transformation") return ResourceKind::Transformation;
    if (s == "independent-buffer") return ResourceKind::IndependentBuffer;
    if (s == "transportation") return ResourceKind::Transportation;
    throw ParseError(line_no, "unknown resource kind '" + s + "'");
}

// `operand @ buffer : signed-rate unit`
Flow parse_flow(const std::string& text, std::size_t line_no) {
    const auto at = text.find('@');
    if (at == std::string::npos)
        throw ParseError(line_no, "flow '" + text + "' is missing '@' (operand @ buffer : rate unit)");
    const auto colon = text.find(':', at + 1);
    if (colon == std::string::npos)
        throw ParseError(line_no, "flow '" + text + "' is missing ':' before the rate");
    Flow f;
    f.operand = trim(text.substr(0, at));
    f.buffer = trim(text.substr(at + 1, colon - at - 1));
    const std::string tail = trim(text.substr(colon + 1));
    const auto sp = tail.find(' ');
    if (sp == std::string::npos)
        throw ParseError(line_no, "flow '" + text + "' is missing a unit after the rate");
    f.rate = parse_number(tail.substr(0, sp), line_no);
    f.unit = trim(tail.substr(sp + 1));
    if (f.operand.empty() || f.buffer.empty() || f.unit.empty())
        throw ParseError(line_no, "flow '" + text + "' has an empty field");
    return f;
}

} // namespace

const Operand* SystemModel::find_operand(const std::string& id) const {
    return find_by_id(operands, id);
}
const ProcessDef* SystemModel::find_process(const std::string& id) const {
    return find_by_id(processes, id);
}
const Resource* SystemModel::find_resource(const std::string& id) const {
    return find_by_id(resources, id);
}
const Capability* SystemModel::find_capability(const std::string& id) const {
    return find_by_id(capabilities, id);
}

int SystemModel::operand_index(const std::string& id) const {
    for (std::size_t i = 0; i < operands.size(); ++i) {
        if (operands[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

int SystemModel::buffer_index(const std::string& id) const {
    int idx = 0;
    for (const auto& r : resources) {
        if (r.kind == ResourceKind::Transportation) continue;
        if (r.id == id) return idx;
        ++idx;
    }
    return -1;
}

SystemModel parse_system_model(const std::string& text) {
    SystemModel m;
    enum class Section { None, Metadata, Operands, Processes, Resources, Capabilities };
    Section section = Section::None;

    std::set<std::string> operand_ids, process_ids, resource_ids, capability_ids;

    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        std::string line = lines[i];
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name == "metadata") section = Section::Metadata;
            else if (name == "operands") section = Section::Operands;
            else if (name == "processes") section = Section::Processes;
            else if (name == "resources") section = Section::Resources;
            else if (name == "capabilities") section = Section::Capabilities;
            else throw ParseError(line_no, "unknown section '[" + name + "]'");
            continue;
        }

        switch (section) {
        case Section::None:
            throw ParseError(line_no, "declaration outside of any section");
        case Section::Metadata: {
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            if (key.empty()) throw ParseError(line_no, "metadata key is empty");
            m.metadata[key] = trim(line.substr(eq + 1));
            break;
        }
        case Section::Operands: {
            const auto f = split(line, '|');
            if (f.size() < 2 || f.size() > 3 || f[0].empty() || f[1].empty())
                throw ParseError(line_no, "expected 'id | name | unit'");
            Operand o{f[0], f[1], f.size() > 2 ? f[2] : ""};
            if (!operand_ids.insert(o.id).second)
                throw ParseError(line_no, "duplicate operand id '" + o.id + "'");
            m.operands.push_back(std::move(o));
            break;
        }
        case Section::Processes: {
            const auto f = split(line, '|');
            if (f.size() != 3 || f[0].empty() || f[1].empty())
                throw ParseError(line_no, "expected 'id | name | kind'");
            ProcessDef p{f[0], f[1], parse_process_kind(f[2], line_no)};
            if (!process_ids.insert(p.id).second)
                throw ParseError(line_no, "duplicate process id '" + p.id + "'");
            m.processes.push_back(std::move(p));
            break;
        }
        case Section::Resources: {
            const auto f = split(line, '|');
            if (f.size() < 3 || f.size() > 4 || f[0].empty() || f[1].empty())
                throw ParseError(line_no, "expected 'id | name | kind [| location]'");
            Resource r;
            r.id = f[0];
            r.name = f[1];
            r.kind = parse_resource_kind(f[2], line_no);
            if (f.size() == 4 && !f[3].empty()) r.location = f[3];
            if (!resource_ids.insert(r.id).second)
                throw ParseError(line_no, "duplicate resource id '" + r.id + "'");
            m.resources.push_back(std::move(r));
            break;
        }
        case Section::Capabilities: {
            const auto f = split(line, '|');
            if (f.size() < 4 || f[0].empty() || f[1].empty() || f[2].empty())
                throw ParseError(line_no, "expected 'id | resource | process | flow ...'");
            Capability c;
            c.id = f[0];
            c.resource = f[1];
            c.process = f[2];
            for (std::size_t k = 3; k < f.size(); ++k) {
                if (f[k].empty()) throw ParseError(line_no, "empty flow field");
                c.flows.push_back(parse_flow(f[k], line_no));
            }
            if (!capability_ids.insert(c.id).second)
                throw ParseError(line_no, "duplicate capability id '" + c.id + "'");
            if (!resource_ids.count(c.resource))
                throw ParseError(line_no, "unknown resource '" + c.resource + "'");
            if (!process_ids.count(c.process))
                throw ParseError(line_no, "unknown process '" + c.process + "'");
            for (const auto& fl : c.flows) {
                if (!operand_ids.count(fl.operand))
                    throw ParseError(line_no, "unknown operand '" + fl.operand + "'");
                if (!resource_ids.count(fl.buffer))
                    throw ParseError(line_no, "unknown buffer '" + fl.buffer + "'");
            }
            m.capabilities.push_back(std::move(c));
            break;
        }
        }
    }
    return m;
}

std::string serialize_system_model(const SystemModel& m) {
    std::ostringstream out;
    if (!m.metadata.empty()) {
        out << "[metadata]\n";
        for (const auto& [k, v] : m.metadata) out << k << " = " << v << "\n";
        out << "\n";
    }
    out << "[operands]\n";
    for (const auto& o : m.operands) {
        out << o.id << " | " << o.name;
        if (!o.unit.empty()) out << " | " << o.unit;
        out << "\n";
    }
    out << "\n[processes]\n";
    for (const auto& p : m.processes) {
        out << p.id << " | " << p.name << " | " << to_string(p.kind) << "\n";
    }
    out << "\n[resources]\n";
    for (const auto& r : m.resources) {
        out << r.id << " | " << r.name << " | " << to_string(r.kind);
        if (r.location) out << " | " << *r.location;
        out << "\n";
    }
    out << "\n[capabilities]\n";
    for (const auto& c : m.capabilities) {
        out << c.id << " | " << c.resource << " | " << c.process;
        for (const auto& f : c.flows) {
            out << " | " << f.operand << " @ " << f.buffer << " : " << fmt_double(f.rate) << " "
                << f.unit;
        }
        out << "\n";
    }
    return out.str();
}

ValidationReport validate_model(const SystemModel& m) {
    ValidationReport rep;
    auto flag = [&rep](const std::string& subject, const std::string& msg) {
        rep.violations.push_back({subject, msg});
    };

    std::set<std::string> seen;
    for (const auto& o : m.operands)
        if (!seen.insert("o:" + o.id).second) flag(o.id, "duplicate operand id");
    for (const auto& p : m.processes)
        if (!seen.insert("p:" + p.id).second) flag(p.id, "duplicate process id");
    for (const auto& r : m.resources)
        if (!seen.insert("r:" + r.id).second) flag(r.id, "duplicate resource id");

    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& c : m.capabilities) {
        if (!seen.insert("c:" + c.id).second) flag(c.id, "duplicate capability id");

        const Resource* res = m.find_resource(c.resource);
        const ProcessDef* proc = m.find_process(c.process);
        if (!res) flag(c.id, "references undeclared resource '" + c.resource + "'");
        if (!proc) flag(c.id, "references undeclared process '" + c.process + "'");
        if (res && proc && proc->kind == ProcessKind::Transformation &&
            res->kind != ResourceKind::Transformation) {
            flag(c.id, "transformation process '" + c.process + "' assigned to " +
                           std::string(to_string(res->kind)) + " resource '" + c.resource + "'");
        }
        if (res && proc && !pairs.insert({c.resource, c.process}).second) {
            flag(c.id, "duplicate (resource, process) pair (" + c.resource + ", " + c.process + ")");
        }
        if (c.flows.empty()) flag(c.id, "capability has no flows");
        for (const auto& f : c.flows) {
            if (!m.find_operand(f.operand))
                flag(c.id, "flow references undeclared operand '" + f.operand + "'");
            const Resource* buf = m.find_resource(f.buffer);
            if (!buf) {
                flag(c.id, "flow references undeclared buffer '" + f.buffer + "'");
            } else if (buf->kind == ResourceKind::Transportation) {
                flag(c.id, "flow placed at transportation resource '" + f.buffer +
                               "', which is not a buffer");
            }
            if (f.rate == 0.0)
                flag(c.id, "flow of operand '" + f.operand + "' has zero rate");
        }
    }
    return rep;
}

std::vector<Resource> enumerate_buffers(const SystemModel& m) {
    std::vector<Resource> out;
    for (const auto& r : m.resources) {
        if (r.kind != ResourceKind::Transportation) out.push_back(r);
    }
    return out;
}

} // namespace h2lca
