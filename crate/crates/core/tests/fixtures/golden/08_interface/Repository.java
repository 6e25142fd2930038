package com.example.data;

import java.util.List;

public interface Repository<T> {
    int PAGE_SIZE = 20;

    List<T> findAll();

    T findById(long id);

    default boolean exists(long id) {
        return findById(id) != null;
    }

    static int pages(int total) {
        return (total + PAGE_SIZE - 1) / PAGE_SIZE;
    }
}
