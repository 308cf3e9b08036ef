#include <algorithm>
#include <cassert>
#include <cmath>

#include "fwdrd/policies.hpp"

namespace fwdrd {

namespace {

void require_capacity(std::size_t capacity) {
  if (capacity == 0) throw Error("cache capacity must be >= 1 block");
}

}  // namespace

LruCache::LruCache(std::size_t capacity) : capacity_(capacity) { require_capacity(capacity); }

bool LruCache::access(BlockId block) {
  if (auto it = map_.find(block); it != map_.end()) {
    order_.splice(order_.begin(), order_, it->second);
    return true;
  }
  if (map_.size() == capacity_) {
    map_.erase(order_.back());
    order_.pop_back();
  }
  order_.push_front(block);
  map_.emplace(block, order_.begin());
  assert(map_.size() <= capacity_);
  return false;
}

LfuCache::LfuCache(std::size_t capacity) : capacity_(capacity) { require_capacity(capacity); }

bool LfuCache::access(BlockId block) {
  const std::uint64_t now = clock_++;
  if (auto it = map_.find(block); it != map_.end()) {
    order_.erase({it->second.freq, it->second.last_use, block});
    ++it->second.freq;
    it->second.last_use = now;
    order_.insert({it->second.freq, now, block});
    return true;
  }
  if (map_.size() == capacity_) {
    const auto victim = *order_.begin();
    order_.erase(order_.begin());
    map_.erase(std::get<2>(victim));
  }
  map_.emplace(block, Entry{1, now});
  order_.insert({1, now, block});
  assert(map_.size() <= capacity_);
  return false;
}

TwoQCache::TwoQCache(std::size_t capacity, double kin_frac, double kout_frac)
    : capacity_(capacity),
      kin_(static_cast<std::size_t>(std::floor(kin_frac * static_cast<double>(capacity)))),
      kout_(static_cast<std::size_t>(std::floor(kout_frac * static_cast<double>(capacity)))) {
  if (capacity < kMinCapacity)
    throw Error("2Q needs a capacity of at least " + std::to_string(kMinCapacity) + " blocks");
  if (!(kin_frac > 0.0 && kin_frac < 1.0) || !(kout_frac > 0.0))
    throw Error("2Q fractions out of range");
  kin_ = std::clamp<std::size_t>(kin_, 1, capacity - 1);
  kout_ = std::max<std::size_t>(kout_, 1);
}

void TwoQCache::reclaim() {
  if (a1in_.size() + am_.size() < capacity_) return;
  if (a1in_.size() > kin_ || am_.empty()) {
    const BlockId y = a1in_.back();
    a1in_.pop_back();
    a1out_.push_front(y);
    map_[y] = {Where::kA1out, a1out_.begin()};
    if (a1out_.size() > kout_) {
      map_.erase(a1out_.back());
      a1out_.pop_back();
    }
  } else {
    map_.erase(am_.back());
    am_.pop_back();
  }
}

bool TwoQCache::access(BlockId block) {
  auto it = map_.find(block);
  if (it != map_.end()) {
    switch (it->second.where) {
      case Where::kAm:
        am_.splice(am_.begin(), am_, it->second.it);
        return true;
      case Where::kA1in:
        return true;
      case Where::kA1out:
        a1out_.erase(it->second.it);
        map_.erase(it);
        reclaim();
        am_.push_front(block);
        map_[block] = {Where::kAm, am_.begin()};
        assert(size() <= capacity_);
        return false;
    }
  }
  reclaim();
  a1in_.push_front(block);
  map_[block] = {Where::kA1in, a1in_.begin()};
  assert(size() <= capacity_);
  return false;
}

ArcCache::ArcCache(std::size_t capacity) : capacity_(capacity) { require_capacity(capacity); }

std::list<BlockId>& ArcCache::list(Where w) {
  switch (w) {
    case Where::kT1: return t1_;
    case Where::kT2: return t2_;
    case Where::kB1: return b1_;
    case Where::kB2: return b2_;
  }
  return t1_;
}

void ArcCache::move_to_front(BlockId block, Where to) {
  auto& dst = list(to);
  if (auto it = map_.find(block); it != map_.end()) {
    dst.splice(dst.begin(), list(it->second.where), it->second.it);
    it->second = {to, dst.begin()};
  } else {
    dst.push_front(block);
    map_[block] = {to, dst.begin()};
  }
}

void ArcCache::remove_lru(Where from) {
  auto& l = list(from);
  map_.erase(l.back());
  l.pop_back();
}

void ArcCache::replace(bool in_b2) {
  const auto t1 = static_cast<double>(t1_.size());
  const bool from_t1 = !t1_.empty() && ((in_b2 && t1 == p_) || t1 > p_);
  if (from_t1 || t2_.empty())
    move_to_front(t1_.back(), Where::kB1);
  else
    move_to_front(t2_.back(), Where::kB2);
}

bool ArcCache::access(BlockId block) {
  const auto c = static_cast<double>(capacity_);
  auto it = map_.find(block);
  if (it != map_.end()) {
    switch (it->second.where) {
      case Where::kT1:
      case Where::kT2:
        move_to_front(block, Where::kT2);
        return true;
      case Where::kB1: {
        const double delta = b1_.size() >= b2_.size()
                                 ? 1.0
                                 : static_cast<double>(b2_.size()) / static_cast<double>(b1_.size());
        p_ = std::min(p_ + delta, c);
        replace(false);
        move_to_front(block, Where::kT2);
        return false;
      }
      case Where::kB2: {
        const double delta = b2_.size() >= b1_.size()
                                 ? 1.0
                                 : static_cast<double>(b1_.size()) / static_cast<double>(b2_.size());
        p_ = std::max(p_ - delta, 0.0);
        replace(true);
        move_to_front(block, Where::kT2);
        return false;
      }
    }
  }

  const std::size_t l1 = t1_.size() + b1_.size();
  const std::size_t total = l1 + t2_.size() + b2_.size();
  if (l1 == capacity_) {
    if (t1_.size() < capacity_) {
      remove_lru(Where::kB1);
      replace(false);
    } else {
      remove_lru(Where::kT1);
    }
  } else if (total >= capacity_) {
    if (total == 2 * capacity_) remove_lru(Where::kB2);
    replace(false);
  }
  move_to_front(block, Where::kT1);
  assert(size() <= capacity_ && t1_.size() + b1_.size() <= capacity_);
  assert(size() + b1_.size() + b2_.size() <= 2 * capacity_);
  return false;
}

FarthestNextUseCache::FarthestNextUseCache(std::size_t capacity) : capacity_(capacity) {
  require_capacity(capacity);
}

bool FarthestNextUseCache::access(BlockId block, std::uint64_t next_time) {
  auto it = next_.find(block);
  const bool hit = it != next_.end();
  if (hit) {
    order_.erase({it->second, block});
    it->second = next_time;
  } else {
    if (next_.size() == capacity_) {
      next_.erase(order_.begin()->second);
      order_.erase(order_.begin());
    }
    next_.emplace(block, next_time);
  }
  order_.insert({next_time, block});
  assert(next_.size() <= capacity_);
  return hit;
}

}  // namespace fwdrd
