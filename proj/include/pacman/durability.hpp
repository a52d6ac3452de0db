#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pacman/storage.hpp"
#include "pacman/value.hpp"

namespace pacman {

struct CommandBody {
    std::string proc;
    std::vector<Value> args;
};

struct AdHocBody {
    std::vector<WriteOp> writes;
};

struct LogEntry {
    uint64_t commit_seq = 0;
    uint64_t epoch = 0;
    std::variant<CommandBody, AdHocBody> body;

    bool is_command() const { return body.index() == 0; }
    const CommandBody& command() const { return std::get<CommandBody>(body); }
    const AdHocBody& adhoc() const { return std::get<AdHocBody>(body); }
};

// frame: [u32 body-len][u64 commit_seq][u64 epoch][u8 body-tag][body][u32 crc]
std::vector<uint8_t> encode_entry(const LogEntry& entry);
size_t encoded_entry_size(const LogEntry& entry);

struct LogBatch {
    uint64_t batch_id = 0;
    std::vector<LogEntry> entries;  // strictly increasing commit_seq
    std::pair<uint64_t, uint64_t> epoch_range{0, 0};
};

struct Manifest {
    int version = 1;
    size_t lane_count = 2;
    uint64_t batch_epochs = 100;
    uint64_t checkpoint_epoch = 0;
    std::string log_mode = "command";  // or "logical"
};

Manifest read_manifest(const std::string& dir);
void write_manifest(const std::string& dir, const Manifest& m);

uint64_t read_pepoch(const std::string& dir);

struct PepochState {
    uint64_t persisted_epoch = 0;
};

struct FlushError : std::runtime_error {
    explicit FlushError(const std::string& what) : std::runtime_error(what) {}
};

// Epoch-grouped command/logical logger. Workers append committed entries to
// per-lane buffers; flush persists every complete epoch up to a bound and
// then advances pepoch to the slowest lane's progress. Log batches rotate on
// epoch boundaries: batch id = (epoch - 1) / batch_epochs, one file per
// (lane, batch) named log.<lane>.<batch>; empty batch files are elided.
class LogWriter {
  public:
    LogWriter(std::string dir, Manifest manifest);
    ~LogWriter();

    void append(size_t lane, LogEntry entry);

    // persists entries with epoch <= up_to_epoch across all lanes, fsyncs,
    // then updates pepoch.log; on write failure pepoch is left unchanged
    PepochState flush(uint64_t up_to_epoch);

    uint64_t pepoch() const;
    uint64_t bytes_written() const { return bytes_written_; }
    size_t lane_count() const { return lanes_.size(); }

    void inject_write_fault() { write_fault_ = true; }  // fails the next flush

  private:
    struct Lane {
        std::mutex mutex;
        std::vector<LogEntry> buffer;  // commit order, epochs nondecreasing
        std::FILE* file = nullptr;
        uint64_t open_batch = UINT64_MAX;
        uint64_t prev_nonempty_batch = UINT64_MAX;
        uint64_t persisted_epoch = 0;
    };

    void open_batch_file(Lane& lane, size_t lane_id, uint64_t batch_id);
    void close_lane_file(Lane& lane);

    std::string dir_;
    Manifest manifest_;
    std::vector<std::unique_ptr<Lane>> lanes_;
    mutable std::mutex pepoch_mutex_;
    uint64_t pepoch_ = 0;
    uint64_t bytes_written_ = 0;
    bool write_fault_ = false;
};

// Read side. Validates per-lane batch chains (a gap is only legal when the
// next file's header names the present predecessor), entry checksums, and
// drops entries beyond pepoch. A torn final frame at the tail of a file is
// a crash artifact and is dropped; a bad checksum on a complete frame is an
// integrity error naming the file.
class LogDirReader {
  public:
    explicit LogDirReader(const std::string& dir);

    uint64_t pepoch() const { return pepoch_; }
    const Manifest& manifest() const { return manifest_; }
    // ascending batch ids with at least one surviving entry
    std::vector<uint64_t> batch_ids() const;

    // merged across lanes by commit_seq; entries with epoch > pepoch or
    // epoch <= min_epoch_exclusive are dropped
    LogBatch load_batch(uint64_t batch_id, uint64_t min_epoch_exclusive = 0) const;

    std::vector<LogBatch> load_all(uint64_t min_epoch_exclusive = 0) const;

  private:
    struct FileRef {
        std::string path;
        size_t lane;
        uint64_t batch_id;
        uint64_t prev_nonempty_batch;
    };

    std::string dir_;
    Manifest manifest_;
    uint64_t pepoch_ = 0;
    std::map<uint64_t, std::vector<FileRef>> files_by_batch_;
};

// quiesced-epoch-boundary checkpoint; previous checkpoint stays authoritative
// until the new file and manifest update are both durable
void take_checkpoint(const Database& db, uint64_t epoch, const std::string& dir);

std::string checkpoint_path(const std::string& dir, uint64_t epoch);

}  // namespace pacman
