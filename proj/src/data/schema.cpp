// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>

#include "lunet/data.hpp"
#include "lunet/error.hpp"

namespace lunet {

std::string to_string(Task task) {
  return task == Task::binary ? "binary" : "multi";
}

Task parse_task(std::string_view text) {
  if (text == "binary")
    return Task::binary;
  if (text == "multi")
    return Task::multi;
  throw ConfigError("task must be 'binary' or 'multi', got '" +
                    std::string(text) + "'");
}

std::string DatasetSchema::normalize_label(std::string_view raw) {
  auto is_trim = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '"' ||
           c == '\'';
  };
  while (!raw.empty() && is_trim(raw.front()))
    raw.remove_prefix(1);
  while (!raw.empty() && (is_trim(raw.back()) || raw.back() == '.'))
    raw.remove_suffix(1);
  std::string out(raw);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::size_t DatasetSchema::multi_class(std::string_view raw) const {
  const std::string key = normalize_label(raw);
  if (key.empty() && blank_label_class)
    return *blank_label_class;
  auto it = class_map.find(key);
  if (it == class_map.end())
    throw DataError(name + ": unmapped label value '" + std::string(raw) +
                    "'");
  return it->second;
}

namespace {

DatasetSchema make_schema(std::string name, std::vector<std::string> columns,
                          const std::vector<std::string> &categorical,
                          std::string label, std::vector<std::string> drop) {
  DatasetSchema s;
  s.name = std::move(name);
  s.columns = std::move(columns);
  s.label_column = std::move(label);
  s.drop_columns = std::move(drop);
  for (const auto &c : s.columns) {
    if (c == s.label_column ||
        std::find(s.drop_columns.begin(), s.drop_columns.end(), c) !=
            s.drop_columns.end())
      continue;
    const bool cat =
        std::find(categorical.begin(), categorical.end(), c) != categorical.end();
    s.feature_columns.push_back(
        {c, cat ? ColumnKind::categorical : ColumnKind::numeric});
  }
  return s;
}

DatasetSchema build_nsl_kdd() {
  DatasetSchema s = make_schema(
      "nsl-kdd",
      {"duration", "protocol_type", "service", "flag", "src_bytes",
       "dst_bytes", "land", "wrong_fragment", "urgent", "hot",
       "num_failed_logins", "logged_in", "num_compromised", "root_shell",
       "su_attempted", "num_root", "num_file_creations", "num_shells",
       "num_access_files", "num_outbound_cmds", "is_host_login",
       "is_guest_login", "count", "srv_count", "serror_rate",
       "srv_serror_rate", "rerror_rate", "srv_rerror_rate", "same_srv_rate",
       "diff_srv_rate", "srv_diff_host_rate", "dst_host_count",
       "dst_host_srv_count", "dst_host_same_srv_rate",
       "dst_host_diff_srv_rate", "dst_host_same_src_port_rate",
       "dst_host_srv_diff_host_rate", "dst_host_serror_rate",
       "dst_host_srv_serror_rate", "dst_host_rerror_rate",
       "dst_host_srv_rerror_rate", "label", "difficulty"},
      {"protocol_type", "service", "flag"}, "label", {"difficulty"});
  s.class_names = {"Normal", "DoS", "Probe", "R2L", "U2R"};
  const std::vector<std::pair<std::size_t, std::vector<std::string>>> groups{
      {0, {"normal"}},
      {1,
       {"back", "land", "neptune", "pod", "smurf", "teardrop", "apache2",
        "mailbomb", "processtable", "udpstorm", "worm"}},
      {2, {"ipsweep", "nmap", "portsweep", "satan", "mscan", "saint"}},
      {3,
       {"ftp_write", "guess_passwd", "imap", "multihop", "phf", "spy",
        "warezclient", "warezmaster", "named", "sendmail", "snmpgetattack",
        "snmpguess", "xlock", "xclock", "xsnoop", "httptunnel",
        "http_tunnel"}},
      {4,
       {"buffer_overflow", "loadmodule", "perl", "rootkit", "ps", "sqlattack",
        "xterm"}},
  };
  for (const auto &[cls, names] : groups)
    for (const auto &n : names)
      s.class_map[n] = cls;
  return s;
}

DatasetSchema build_unsw_nb15() {
  DatasetSchema s = make_schema(
      "unsw-nb15",
      {"id", "dur", "proto", "service", "state", "spkts", "dpkts", "sbytes",
       "dbytes", "rate", "sttl", "dttl", "sload", "dload", "sloss", "dloss",
       "sinpkt", "dinpkt", "sjit", "djit", "swin", "stcpb", "dtcpb", "dwin",
       "tcprtt", "synack", "ackdat", "smean", "dmean", "trans_depth",
       "response_body_len", "ct_srv_src", "ct_state_ttl", "ct_dst_ltm",
       "ct_src_dport_ltm", "ct_dst_sport_ltm", "ct_dst_src_ltm",
       "is_ftp_login", "ct_ftp_cmd", "ct_flw_http_mthd", "ct_src_ltm",
       "ct_srv_dst", "is_sm_ips_ports", "attack_cat", "label"},
      {"proto", "service", "state"}, "attack_cat", {"id", "label"});
  s.class_names = {"Normal",   "Analysis", "Backdoor",       "DoS",
                   "Exploits", "Fuzzers",  "Generic",        "Reconnaissance",
                   "Shellcode", "Worms"};
  for (std::size_t i = 0; i < s.class_names.size(); ++i)
    s.class_map[DatasetSchema::normalize_label(s.class_names[i])] = i;
  s.class_map["backdoors"] = 2;
  s.blank_label_class = 0;
  return s;
}

} // namespace

const DatasetSchema &nsl_kdd_schema() {
  static const DatasetSchema schema = build_nsl_kdd();
  return schema;
}

const DatasetSchema &unsw_nb15_schema() {
  static const DatasetSchema schema = build_unsw_nb15();
  return schema;
}

const DatasetSchema &schema_for(std::string_view name) {
  if (name == "nsl-kdd")
    return nsl_kdd_schema();
  if (name == "unsw-nb15")
    return unsw_nb15_schema();
  throw ConfigError("unknown dataset '" + std::string(name) +
                    "' (expected nsl-kdd or unsw-nb15)");
}

} // namespace lunet
