package com.example;

public class Counter {
    private int count;
    private int hits;
    private final Object lock = new Object();
    private volatile boolean closed;

    public synchronized void increment() {
        count++;
        hits++;
    }

    public void reset() {
        synchronized (lock) {
            count = 0;
        }
        hits = 0;
    }

    public int get() {
        synchronized (this) {
            return count;
        }
    }

    public void close() {
        closed = true;
    }
}
