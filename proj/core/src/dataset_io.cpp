#include <cmath>

#include "langdist/binary.hpp"
#include "langdist/embedstore.hpp"
#include "langdist/error.hpp"
#include "langdist/io.hpp"

namespace langdist::embed {

std::string encode_ldds(const LabeledDataset& ds) {
  if (ds.labels.size() > 0xFFFF) throw FormatError("too many labels for LDDS");
  binary::Writer w;
  w.bytes("LDDS");
  w.put<std::uint16_t>(kLddsVersion);
  w.str<std::uint8_t>(ds.language);
  w.str<std::uint16_t>(ds.model_id);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(ds.layer));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.dim()));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(ds.labels.size()));
  for (const auto& l : ds.labels) w.str<std::uint16_t>(l);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.size()));
  w.str<std::uint32_t>(ds.metadata.dump());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    w.put<std::uint16_t>(static_cast<std::uint16_t>(ds.label_of[i]));
    for (Eigen::Index k = 0; k < ds.dim(); ++k) {
      w.put<double>(ds.features(static_cast<Eigen::Index>(i), k));
    }
  }
  return w.take();
}

LabeledDataset decode_ldds(std::string_view bytes) {
  binary::Reader r(bytes);
  if (r.remaining() < 4 || r.bytes(4, "magic") != "LDDS") {
    throw FormatError("bad magic: not an LDDS file");
  }
  const auto version = r.get<std::uint16_t>("version");
  if (version != kLddsVersion) {
    throw FormatError("unsupported LDDS version " + std::to_string(version));
  }
  LabeledDataset ds;
  ds.language = r.str<std::uint8_t>("language code");
  ds.model_id = r.str<std::uint16_t>("model id");
  ds.layer = r.get<std::uint8_t>("layer");
  const auto dim = r.get<std::uint32_t>("dim");
  const auto label_count = r.get<std::uint16_t>("label count");
  for (std::uint16_t i = 0; i < label_count; ++i) {
    ds.labels.push_back(r.str<std::uint16_t>("label"));
  }
  const auto items = r.get<std::uint32_t>("item count");
  const std::string meta = r.str<std::uint32_t>("metadata");
  try {
    ds.metadata = nlohmann::ordered_json::parse(meta);
  } catch (const nlohmann::json::exception&) {
    throw FormatError("LDDS metadata is not valid JSON");
  }
  ds.features.resize(items, dim);
  ds.label_of.resize(items);
  for (std::uint32_t i = 0; i < items; ++i) {
    const std::size_t off = r.offset();
    const auto li = r.get<std::uint16_t>("label index");
    if (li >= label_count) {
      throw CorruptionError("label index out of range", off);
    }
    ds.label_of[i] = li;
    for (std::uint32_t k = 0; k < dim; ++k) {
      const double v = r.get<double>("feature value");
      if (!std::isfinite(v)) throw CorruptionError("non-finite feature", r.offset() - 8);
      ds.features(i, k) = v;
    }
  }
  if (r.remaining() != 0) {
    throw CorruptionError(std::to_string(r.remaining()) + " trailing bytes", r.offset());
  }
  return ds;
}

LabeledDataset read_dataset_file(const std::string& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_ldds(bytes);
  } catch (const CorruptionError& e) {
    throw CorruptionError(path + ": " + e.detail(), e.offset());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_dataset_file(const std::string& path, const LabeledDataset& ds) {
  write_file_atomic(path, encode_ldds(ds));
}

}  // namespace langdist::embed
