#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace h2lca {

enum class ProcessKind { Transformation, RefinedTransportation };
enum class ResourceKind { Transformation, IndependentBuffer, Transportation };

const char* to_string(ProcessKind k);
const char* to_string(ResourceKind k);

struct Operand {
    std::string id;
    std::string name;
    std::string unit;
};

struct ProcessDef {
    std::string id;
    std::string name;
    ProcessKind kind = ProcessKind::Transformation;
};

struct Resource {
    std::string id;
    std::string name;
    ResourceKind kind = ResourceKind::Transformation;
    std::optional<std::string> location;
};

/// One operand moved per firing: negative rate pulls from the buffer,
/// positive rate injects into it.
struct Flow {
    std::string operand;
    std::string buffer;
    double rate = 0.0;
    std::string unit;
};

/// "Resource r performs process p", with the operand flows it drives.
struct Capability {
    std::string id;
    std::string resource;
    std::string process;
    std::vector<Flow> flows;
};

/// Parsed model document. Treat as immutable once built: the declaration
/// order of every section is load-bearing for matrix row/column order.
struct SystemModel {
    std::vector<Operand> operands;
    std::vector<ProcessDef> processes;
    std::vector<Resource> resources;
    std::vector<Capability> capabilities;
    std::map<std::string, std::string> metadata;

    const Operand* find_operand(const std::string& id) const;
    const ProcessDef* find_process(const std::string& id) const;
    const Resource* find_resource(const std::string& id) const;
    const Capability* find_capability(const std::string& id) const;

    /// Index of an operand in declaration order, -1 if unknown.
    int operand_index(const std::string& id) const;
    /// Index of a resource within the buffer subsequence, -1 if not a buffer.
    int buffer_index(const std::string& id) const;
};

/// Parses the section-based model document format:
///   [operands]     id | name | unit
///   [processes]    id | name | kind
///   [resources]    id | name | kind [| location]
///   [capabilities] id | resource | process | flow | flow ...
///   [metadata]     key = value
/// Flows read `operand @ buffer : signed-rate unit`. '#' starts a comment.
/// Throws ParseError (with line number) on syntax errors, duplicate ids,
/// or references to undeclared ids.
SystemModel parse_system_model(const std::string& text);

/// Canonical re-emission of the document format; parse(serialize(m))
/// reproduces m exactly.
std::string serialize_system_model(const SystemModel& m);

struct Violation {
    std::string subject; // id of the offending declaration
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Structural checks beyond parsing. Violations are returned as data,
/// never thrown: a model with violations is still inspectable.
ValidationReport validate_model(const SystemModel& m);

/// Buffers are every non-transportation resource, in declaration order.
std::vector<Resource> enumerate_buffers(const SystemModel& m);

} // namespace h2lca
