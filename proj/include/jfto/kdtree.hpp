#ifndef JFTO_KDTREE_HPP
#define JFTO_KDTREE_HPP

// Compact static k-d tree over 3D points for nearest-neighbor queries.

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Core>

namespace jfto {

class KdTree3 {
public:
    KdTree3() = default;

    explicit KdTree3(const Eigen::Matrix3Xd& pts) : points_(pts) {
        const int n = static_cast<int>(pts.cols());
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), 0);
        nodes_.reserve(n);
        if (n > 0) root_ = build(0, n);
    }

    struct Result {
        int index = -1;
        double dist2 = std::numeric_limits<double>::infinity();
    };

    Result nearest(const Eigen::Vector3d& q) const {
        Result best;
        if (root_ >= 0) search(root_, q, best);
        return best;
    }

    // indices and squared distances of up to k nearest points, sorted
    std::vector<Result> knearest(const Eigen::Vector3d& q, int k) const {
        std::vector<Result> heap;  // max-heap on dist2
        if (root_ >= 0 && k > 0) search_k(root_, q, k, heap);
        std::sort(heap.begin(), heap.end(),
                  [](const Result& a, const Result& b) { return a.dist2 < b.dist2; });
        return heap;
    }

    bool empty() const { return nodes_.empty(); }

private:
    struct Node {
        int point = -1;
        int dim = 0;
        int left = -1;
        int right = -1;
    };

    int build(int begin, int end) {
        const int count = end - begin;
        // split on the widest extent of the range
        Eigen::Vector3d lo = points_.col(order_[begin]);
        Eigen::Vector3d hi = lo;
        for (int i = begin + 1; i < end; ++i) {
            lo = lo.cwiseMin(points_.col(order_[i]));
            hi = hi.cwiseMax(points_.col(order_[i]));
        }
        int dim;
        (hi - lo).maxCoeff(&dim);

        const int mid = begin + count / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid,
                         order_.begin() + end, [&](int a, int b) {
                             return points_(dim, a) < points_(dim, b);
                         });
        Node node;
        node.point = order_[mid];
        node.dim = dim;
        const int self = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        if (mid > begin) nodes_[self].left = build(begin, mid);
        if (mid + 1 < end) nodes_[self].right = build(mid + 1, end);
        return self;
    }

    void search(int idx, const Eigen::Vector3d& q, Result& best) const {
        const Node& node = nodes_[idx];
        const double d2 = (points_.col(node.point) - q).squaredNorm();
        if (d2 < best.dist2) best = {node.point, d2};

        const double delta = q[node.dim] - points_(node.dim, node.point);
        const int first = delta < 0 ? node.left : node.right;
        const int second = delta < 0 ? node.right : node.left;
        if (first >= 0) search(first, q, best);
        if (second >= 0 && delta * delta < best.dist2) search(second, q, best);
    }

    void search_k(int idx, const Eigen::Vector3d& q, int k,
                  std::vector<Result>& heap) const {
        const Node& node = nodes_[idx];
        const double d2 = (points_.col(node.point) - q).squaredNorm();
        auto cmp = [](const Result& a, const Result& b) { return a.dist2 < b.dist2; };
        if (static_cast<int>(heap.size()) < k) {
            heap.push_back({node.point, d2});
            std::push_heap(heap.begin(), heap.end(), cmp);
        } else if (d2 < heap.front().dist2) {
            std::pop_heap(heap.begin(), heap.end(), cmp);
            heap.back() = {node.point, d2};
            std::push_heap(heap.begin(), heap.end(), cmp);
        }
        const double delta = q[node.dim] - points_(node.dim, node.point);
        const int first = delta < 0 ? node.left : node.right;
        const int second = delta < 0 ? node.right : node.left;
        if (first >= 0) search_k(first, q, k, heap);
        const double bound = static_cast<int>(heap.size()) < k
                                 ? std::numeric_limits<double>::infinity()
                                 : heap.front().dist2;
        if (second >= 0 && delta * delta < bound) search_k(second, q, k, heap);
    }

    Eigen::Matrix3Xd points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace jfto

#endif
