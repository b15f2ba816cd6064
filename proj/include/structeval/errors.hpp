#pragma once

#include <stdexcept>
#include <string>

namespace structeval {

// Exit-code classes used by the CLI: user/config errors map to 1,
// I/O errors map to 2.
enum class ErrorClass { User = 1, Io = 2 };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& message)
      : std::runtime_error(message), cls_(cls) {}

  ErrorClass error_class() const { return cls_; }
  int exit_code() const { return static_cast<int>(cls_); }

 private:
  ErrorClass cls_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorClass::Io, message) {}
};

class MissingFileError : public IoError {
 public:
  explicit MissingFileError(const std::string& path)
      : IoError("file not found: " + path) {}
};

// grammar
class SyntaxError : public Error {
 public:
  SyntaxError(int line, int col, const std::string& message)
      : Error(ErrorClass::User,
              "syntax error at line " + std::to_string(line) + ", col " +
                  std::to_string(col) + ": " + message),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

class UnknownSymbolError : public Error {
 public:
  explicit UnknownSymbolError(const std::string& name)
      : Error(ErrorClass::User, "unknown symbol: " + name), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class BadRegexError : public Error {
 public:
  BadRegexError(const std::string& name, const std::string& detail)
      : Error(ErrorClass::User, "bad regex in terminal '" + name + "': " + detail),
        name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class DepthExceededError : public Error {
 public:
  explicit DepthExceededError(const std::string& what_failed)
      : Error(ErrorClass::User, "derivation depth exceeded: " + what_failed) {}
};

// treequery / attributes
class UnknownAttributeError : public Error {
 public:
  explicit UnknownAttributeError(const std::string& name)
      : Error(ErrorClass::User, "unknown attribute: " + name) {}
};

// corpus
class MalformedRecordError : public Error {
 public:
  MalformedRecordError(int line, const std::string& detail)
      : Error(ErrorClass::User,
              "malformed record at line " + std::to_string(line) + ": " + detail),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class DuplicateIdError : public Error {
 public:
  explicit DuplicateIdError(const std::string& id)
      : Error(ErrorClass::User, "duplicate sample id: " + id) {}
};

class TypeMismatchError : public Error {
 public:
  explicit TypeMismatchError(const std::string& id)
      : Error(ErrorClass::User, "sidecar value has wrong type for id: " + id) {}
};

class MissingLabelError : public Error {
 public:
  explicit MissingLabelError(const std::string& id)
      : Error(ErrorClass::User, "missing label for sample id: " + id) {}
};

// embed
class DimensionMismatchError : public Error {
 public:
  explicit DimensionMismatchError(const std::string& detail)
      : Error(ErrorClass::User, "dimension mismatch: " + detail) {}
};

class RemoteError : public Error {
 public:
  RemoteError(int status, const std::string& detail)
      : Error(ErrorClass::User,
              "remote embedding error (status " + std::to_string(status) + "): " + detail),
        status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class CacheCorruptError : public Error {
 public:
  explicit CacheCorruptError(const std::string& detail)
      : Error(ErrorClass::User, "embedding cache corrupt: " + detail) {}
};

// stats
class KindMismatchError : public Error {
 public:
  explicit KindMismatchError(const std::string& detail)
      : Error(ErrorClass::User, "distribution kind mismatch: " + detail) {}
};

class KTooLargeError : public Error {
 public:
  KTooLargeError(int k, std::size_t n)
      : Error(ErrorClass::User, "k = " + std::to_string(k) +
                                    " must be smaller than the point count " +
                                    std::to_string(n)) {}
};

// metrics
class EmptyCorpusError : public Error {
 public:
  explicit EmptyCorpusError(const std::string& role)
      : Error(ErrorClass::User, "empty corpus: " + role) {}
};

class NoTokensError : public Error {
 public:
  NoTokensError() : Error(ErrorClass::User, "corpus contains no tokens") {}
};

class NoPairsError : public Error {
 public:
  explicit NoPairsError(const std::string& role)
      : Error(ErrorClass::User, "no matched key-node pairs in corpus: " + role),
        role_(role) {}
  const std::string& role() const { return role_; }

 private:
  std::string role_;
};

class MissingAttributeError : public Error {
 public:
  explicit MissingAttributeError(const std::string& name)
      : Error(ErrorClass::User, "attribute not present in both corpora: " + name) {}
};

// dpgen
class NoParsedSamplesError : public Error {
 public:
  NoParsedSamplesError()
      : Error(ErrorClass::User, "no sample of the real corpus parses under the grammar") {}
};

// report
class MetricAbsentError : public Error {
 public:
  explicit MetricAbsentError(const std::string& name)
      : Error(ErrorClass::User,
              "metric '" + name + "' is not present in at least two reports") {}
};

class MixedDatasetsError : public Error {
 public:
  explicit MixedDatasetsError(const std::string& detail)
      : Error(ErrorClass::User, "reports do not share a dataset name: " + detail) {}
};

// cli / config
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& detail) : Error(ErrorClass::User, detail) {}
};

}  // namespace structeval
