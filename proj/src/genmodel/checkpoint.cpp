//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/genmodel/checkpoint.h"

#include <sstream>

#include <json.hpp>

#include "molchord/error.h"
#include "molchord/util/hash.h"
#include "molchord/util/io.h"
#include "molchord/util/numfmt.h"

namespace molchord {
namespace {
  using nlohmann::json;

  [[noreturn]] void corrupt(const std::string &what) {
    throw Error(Errc::kCorruptCheckpoint, what);
  }

  json config_json(const ModelConfig &c) {
    return { { "d", c.d },
             { "d_feat", c.d_feat },
             { "adapter_hidden", c.adapter_hidden },
             { "hidden", c.hidden },
             { "window", c.window },
             { "vocab_size", c.vocab_size } };
  }

  ModelConfig config_from(const json &j) {
    ModelConfig c;
    c.d = j.at("d").get<int>();
    c.d_feat = j.at("d_feat").get<int>();
    c.adapter_hidden = j.at("adapter_hidden").get<int>();
    c.hidden = j.at("hidden").get<int>();
    c.window = j.at("window").get<int>();
    c.vocab_size = j.at("vocab_size").get<int>();
    return c;
  }

  // Splits off the next line (without the newline).
  std::string_view next_line(std::string_view &text) {
    const auto nl = text.find('\n');
    if (nl == std::string_view::npos)
      corrupt("truncated checkpoint");
    auto line = text.substr(0, nl);
    text.remove_prefix(nl + 1);
    return line;
  }

  std::string_view expect_key(std::string_view line, std::string_view key) {
    if (line.substr(0, key.size()) != key || line.size() <= key.size()
        || line[key.size()] != ' ')
      corrupt("expected '" + std::string(key) + "' line");
    return line.substr(key.size() + 1);
  }
}  // namespace

std::string serialize_checkpoint(const Checkpoint &ckpt,
                                 const Vocabulary &vocab) {
  const auto &params = ckpt.params;
  if (params.config().vocab_size != vocab.size())
    throw Error(Errc::kShapeMismatch,
                "model vocabulary size differs from the vocabulary");

  std::string out;
  out += "molchord-checkpoint " + std::to_string(kCheckpointVersion) + "\n";
  out += "config " + config_json(params.config()).dump() + "\n";
  out += "vocab " + std::to_string(vocab.size());
  for (const auto &t: vocab.tokens())
    out += " " + t;
  out += "\n";

  json meta = { { "step", ckpt.step },
                { "stage", ckpt.stage },
                { "config_hash", ckpt.config_hash },
                { "val_loss", ckpt.val_loss ? format_double(*ckpt.val_loss)
                                            : std::string() } };
  out += "meta " + meta.dump() + "\n";

  for (int b = 0; b < kNumParamBlocks; ++b) {
    const auto block = static_cast<ParamBlock>(b);
    const auto shape = params.shape(block);
    out += "tensor " + std::string(ModelParams::block_name(block)) + " "
           + std::to_string(shape.rows) + " " + std::to_string(shape.cols)
           + "\n";
    const auto values = params.block(block);
    for (int r = 0; r < shape.rows; ++r) {
      for (int c = 0; c < shape.cols; ++c) {
        if (c > 0)
          out += ' ';
        out += format_double(values[static_cast<std::size_t>(r) * shape.cols + c]);
      }
      out += '\n';
    }
  }
  out += "sha256 " + sha256_hex(out) + "\n";
  return out;
}

Checkpoint parse_checkpoint(std::string_view text, const Vocabulary &vocab) {
  const auto tail = text.rfind("sha256 ");
  if (tail == std::string_view::npos)
    corrupt("missing digest line");
  const std::string_view body = text.substr(0, tail);
  std::string_view digest = text.substr(tail + 7);
  while (!digest.empty() && (digest.back() == '\n' || digest.back() == '\r'))
    digest.remove_suffix(1);
  if (digest != sha256_hex(body))
    corrupt("digest mismatch");

  std::string_view rest = body;
  const auto header = next_line(rest);
  if (header != "molchord-checkpoint " + std::to_string(kCheckpointVersion))
    corrupt("unsupported checkpoint header '" + std::string(header) + "'");

  Checkpoint ckpt;
  ModelConfig config;
  try {
    config = config_from(json::parse(expect_key(next_line(rest), "config")));
  } catch (const json::exception &e) {
    corrupt(std::string("bad config: ") + e.what());
  }

  {
    std::istringstream in { std::string(expect_key(next_line(rest), "vocab")) };
    std::size_t n = 0;
    in >> n;
    std::vector<std::string> tokens(n);
    for (auto &t: tokens)
      in >> t;
    if (!in || tokens != vocab.tokens())
      corrupt("vocabulary differs from this build");
  }

  try {
    const json meta = json::parse(expect_key(next_line(rest), "meta"));
    ckpt.step = meta.at("step").get<std::int64_t>();
    ckpt.stage = meta.at("stage").get<std::string>();
    ckpt.config_hash = meta.at("config_hash").get<std::string>();
    const auto vl = meta.at("val_loss").get<std::string>();
    if (!vl.empty()) {
      ckpt.val_loss = parse_double(vl);
      if (!ckpt.val_loss)
        corrupt("bad val_loss");
    }
  } catch (const json::exception &e) {
    corrupt(std::string("bad meta: ") + e.what());
  }

  try {
    ckpt.params = ModelParams(config);
  } catch (const Error &e) {
    corrupt(e.what());
  }
  for (int b = 0; b < kNumParamBlocks; ++b) {
    const auto block = static_cast<ParamBlock>(b);
    const auto shape = ckpt.params.shape(block);
    std::istringstream head { std::string(expect_key(next_line(rest), "tensor")) };
    std::string name;
    int rows = 0, cols = 0;
    head >> name >> rows >> cols;
    if (name != ModelParams::block_name(block) || rows != shape.rows
        || cols != shape.cols)
      corrupt("tensor " + name + " does not match the configured shape");
    auto values = ckpt.params.block(block);
    for (int r = 0; r < rows; ++r) {
      std::string_view line = next_line(rest);
      for (int c = 0; c < cols; ++c) {
        const auto sp = line.find(' ');
        const auto field = line.substr(0, sp);
        const auto v = parse_double(field);
        if (!v)
          corrupt("bad value in tensor " + name);
        values[static_cast<std::size_t>(r) * cols + c] = *v;
        line = sp == std::string_view::npos ? std::string_view {}
                                            : line.substr(sp + 1);
      }
      if (!line.empty())
        corrupt("extra values in tensor " + name);
    }
  }
  if (!rest.empty())
    corrupt("trailing data before digest");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path &path,
                     const Checkpoint &ckpt) {
  write_text_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  return parse_checkpoint(read_text_file(path));
}

}  // namespace molchord
