package com.example.notes;

import android.os.Bundle;
import android.util.Log;
import android.view.LayoutInflater;
import android.view.View;
import android.view.ViewGroup;
import androidx.fragment.app.Fragment;

public class NotesFragment extends Fragment {
    private static final String TAG = "NotesFragment";
    protected static int instances;
    int visibleCount;

    @Override
    public View onCreateView(LayoutInflater inflater, ViewGroup container, Bundle state) {
        instances++;
        Log.i(TAG, "create " + instances);
        View root = inflater.inflate(R.layout.notes, container, false);
        return root;
    }

    protected final void refresh() {
        System.out.println("refresh");
        visibleCount = 0;
    }
}
