#include <string>
#include <unordered_map>

#include "flowgate/dataset.hpp"
#include "flowgate/error.hpp"

namespace flowgate {

namespace {

// Category of every attack name in the KDD-99 training data (22 attacks) and
// the additional names that appear only in the labelled test data.
const std::unordered_map<std::string_view, FlowClass>& attack_table()
{
    static const std::unordered_map<std::string_view, FlowClass> table{
        {"normal", FlowClass::Normal},
        // training attacks
        {"ipsweep", FlowClass::Probe},
        {"nmap", FlowClass::Probe},
        {"portsweep", FlowClass::Probe},
        {"satan", FlowClass::Probe},
        {"back", FlowClass::DoS},
        {"land", FlowClass::DoS},
        {"neptune", FlowClass::DoS},
        {"pod", FlowClass::DoS},
        {"smurf", FlowClass::DoS},
        {"teardrop", FlowClass::DoS},
        {"buffer_overflow", FlowClass::U2R},
        {"loadmodule", FlowClass::U2R},
        {"perl", FlowClass::U2R},
        {"rootkit", FlowClass::U2R},
        {"ftp_write", FlowClass::R2L},
        {"guess_passwd", FlowClass::R2L},
        {"imap", FlowClass::R2L},
        {"multihop", FlowClass::R2L},
        {"phf", FlowClass::R2L},
        {"spy", FlowClass::R2L},
        {"warezclient", FlowClass::R2L},
        {"warezmaster", FlowClass::R2L},
        // test-only attacks
        {"mscan", FlowClass::Probe},
        {"saint", FlowClass::Probe},
        {"apache2", FlowClass::DoS},
        {"mailbomb", FlowClass::DoS},
        {"processtable", FlowClass::DoS},
        {"udpstorm", FlowClass::DoS},
        {"httptunnel", FlowClass::U2R},
        {"ps", FlowClass::U2R},
        {"sqlattack", FlowClass::U2R},
        {"xterm", FlowClass::U2R},
        {"named", FlowClass::R2L},
        {"sendmail", FlowClass::R2L},
        {"snmpgetattack", FlowClass::R2L},
        {"snmpguess", FlowClass::R2L},
        {"worm", FlowClass::R2L},
        {"xlock", FlowClass::R2L},
        {"xsnoop", FlowClass::R2L},
    };
    return table;
}

} // namespace

FlowClass map_attack_to_class(std::string_view label)
{
    std::string_view name = label;
    if (!name.empty() && name.back() == '.')
        name.remove_suffix(1);
    const auto& table = attack_table();
    if (auto it = table.find(name); it != table.end())
        return it->second;
    throw DataError("unknown attack label '" + std::string(label) + "'");
}

FlowClass class_from_code(std::size_t c)
{
    if (c >= kNumClasses)
        throw DataError("class code " + std::to_string(c) + " out of range");
    return static_cast<FlowClass>(c);
}

std::string_view class_name(FlowClass c) noexcept
{
    switch (c) {
    case FlowClass::Normal: return "Normal";
    case FlowClass::Probe: return "Probe";
    case FlowClass::DoS: return "DoS";
    case FlowClass::U2R: return "U2R";
    case FlowClass::R2L: return "R2L";
    }
    return "?";
}

} // namespace flowgate
